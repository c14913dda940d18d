import init, { gateCurves, solve, objectiveSlice } from "./pkg/gda_web.js";

const $ = (id) => document.getElementById(id);

function spec() {
  return JSON.stringify({
    kind: $("kind").value,
    size: +$("size").value,
    m: +$("m").value,
    n: +$("n").value,
    delta: +$("delta").value,
    epsilon: +$("epsilon").value,
    seed: +$("seed").value,
  });
}

function plot(canvas, xs, series, { yMin, yMax, log = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const tf = log ? (v) => Math.log10(Math.max(v, 1e-300)) : (v) => v;
  const all = series.flatMap((s) => s.ys.map(tf)).filter(Number.isFinite);
  const lo = yMin ?? Math.min(...all);
  const hi = yMax ?? Math.max(...all);
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => 30 + ((x - x0) / (x1 - x0 || 1)) * (w - 40);
  const py = (y) => h - 20 - ((tf(y) - lo) / (hi - lo || 1)) * (h - 30);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(30, 10, w - 40, h - 30);
  ctx.fillStyle = "#444";
  ctx.fillText((log ? "1e" : "") + hi.toPrecision(3), 2, 14);
  ctx.fillText((log ? "1e" : "") + lo.toPrecision(3), 2, h - 20);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    s.ys.forEach((y, k) => (k ? ctx.lineTo(px(xs[k]), py(y)) : ctx.moveTo(px(xs[k]), py(y))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function drawGates() {
  const curves = JSON.parse(gateCurves(400, +$("m").value));
  for (const [key, curve] of Object.entries(curves)) {
    const scaled = curve.slope.map((v) => v / curve.slope_bound);
    plot($(`gate-${key}`), curve.z, [
      { ys: curve.value, color: "#1f5fbf" },
      { ys: scaled, color: "#c0392b", dash: [4, 3] },
    ], { yMin: -1, yMax: 1 });
  }
}

function runSolve() {
  try {
    const r = JSON.parse(solve(spec(), $("method").value, +$("step").value, +$("iters").value));
    const xs = r.epoch_best.map((_, k) => k);
    plot($("trajectory"), xs, [{ ys: r.epoch_best, color: "#1f5fbf" }], { log: true });
    const vertices = r.vertices
      .map((v, q) => `  ${q}: s=${v.s.toFixed(3)} lambda=${v.lambda.toFixed(3)} dist2=${v.dist2.toFixed(3)} delta=${v.delta.toExponential(2)}`)
      .join("\n");
    $("solve-out").textContent =
      `d = ${r.d}, ${r.iterations} iterations, best violation ${r.max_violation.toExponential(3)} ` +
      `(epsilon ${r.epsilon}, ${r.pass ? "stationary" : "not stationary"})\n` +
      `vertices:\n${vertices}\ndecode: ${JSON.stringify(r.decode, null, 1)}`;
  } catch (e) {
    $("solve-out").textContent = String(e);
  }
}

function runSlice() {
  try {
    const r = JSON.parse(objectiveSlice(spec(), +$("q").value, +$("i").value, +$("j").value, 80));
    const canvas = $("slice");
    const ctx = canvas.getContext("2d");
    const n = r.ticks.length;
    const cell = canvas.width / n;
    const span = r.max - r.min || 1;
    r.values.forEach((row, a) =>
      row.forEach((v, b) => {
        const t = (v - r.min) / span;
        ctx.fillStyle = `rgb(${Math.round(255 * t)}, ${Math.round(90 + 80 * (1 - Math.abs(2 * t - 1)))}, ${Math.round(255 * (1 - t))})`;
        // x_k grows to the right, y_k grows upward
        ctx.fillRect(a * cell, canvas.height - (b + 1) * cell, cell + 1, cell + 1);
      }));
    $("slice-out").textContent = `coordinate ${r.coordinate}: f in [${r.min.toPrecision(4)}, ${r.max.toPrecision(4)}] (blue low, red high)`;
  } catch (e) {
    $("slice-out").textContent = String(e);
  }
}

await init();
$("draw-gates").onclick = drawGates;
$("run-solve").onclick = runSolve;
$("run-slice").onclick = runSlice;
drawGates();
