import init, { trainModel, compareMethods, semanticGraph } from "./pkg/ckd_demo.js";

const palette = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                 "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"];
const $ = (id) => document.getElementById(id);

function params() {
  const out = {};
  for (const el of $("params").querySelectorAll("input, select")) {
    out[el.name] = el.type === "number" ? Number(el.value) : el.value;
  }
  return JSON.stringify(out);
}

function status(msg, isError = false) {
  $("status").textContent = msg;
  $("status").classList.toggle("err", isError);
}

function run(label, fn) {
  status(label + "...");
  // let the status line paint before the synchronous wasm call
  setTimeout(() => {
    const t0 = performance.now();
    try {
      fn();
      status(`${label} done in ${(performance.now() - t0).toFixed(0)} ms`);
    } catch (e) {
      status(String(e), true);
    }
  }, 10);
}

function extent(values) {
  let lo = Math.min(...values), hi = Math.max(...values);
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function drawCurve(objective) {
  const cv = $("curve"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  if (objective.length < 2) {
    g.fillText("no iterations (closed-form method)", 20, 120);
    return;
  }
  const pad = 30, [lo, hi] = extent(objective);
  const x = (i) => pad + (i / (objective.length - 1)) * (cv.width - 2 * pad);
  const y = (v) => cv.height - pad - ((v - lo) / (hi - lo)) * (cv.height - 2 * pad);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, cv.width - 2 * pad, cv.height - 2 * pad);
  g.strokeStyle = "#1f77b4";
  g.beginPath();
  objective.forEach((v, i) => (i ? g.lineTo(x(i), y(v)) : g.moveTo(x(i), y(v))));
  g.stroke();
  g.fillStyle = "#333";
  g.fillText(hi.toExponential(3), 2, pad - 6);
  g.fillText(lo.toExponential(3), 2, cv.height - 8);
  g.fillText(`${objective.length - 1} iterations`, cv.width - 90, cv.height - 8);
}

function drawScatter(points) {
  const cv = $("scatter"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const pad = 12;
  const [x0, x1] = extent(points.map((p) => p.x));
  const [y0, y1] = extent(points.map((p) => p.y));
  for (const p of points) {
    const px = pad + ((p.x - x0) / (x1 - x0)) * (cv.width - 2 * pad);
    const py = cv.height - pad - ((p.y - y0) / (y1 - y0)) * (cv.height - 2 * pad);
    const color = palette[p.class % palette.length];
    g.beginPath();
    g.arc(px, py, 3.5, 0, 2 * Math.PI);
    if (p.modality === 1) {
      g.fillStyle = color;
      g.fill();
    } else {
      g.strokeStyle = color;
      g.stroke();
    }
  }
}

function drawHeat(view) {
  const cv = $("heat"), g = cv.getContext("2d");
  const cell = cv.width / view.n;
  g.clearRect(0, 0, cv.width, cv.height);
  for (let i = 0; i < view.n; i++) {
    for (let j = 0; j < view.n; j++) {
      const s = view.similarity[i * view.n + j];
      const shade = Math.round(255 * (1 - s));
      g.fillStyle = `rgb(${shade},${shade},255)`;
      g.fillRect(j * cell, i * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
}

function cmcTable(result) {
  const rows = result.i2t.cmc.map(([m, rate], k) =>
    `<tr><td>${m}</td><td>${rate.toFixed(3)}</td><td>${result.t2i.cmc[k][1].toFixed(3)}</td></tr>`);
  return `<table><tr><th>task</th><th>I2T</th><th>T2I</th></tr>
    <tr><td>MAP</td><td>${result.i2t.map.toFixed(4)}</td><td>${result.t2i.map.toFixed(4)}</td></tr>
    <tr><th>CMC@m</th><th></th><th></th></tr>${rows.join("")}</table>`;
}

$("train").onclick = () => run("training", () => {
  const r = JSON.parse(trainModel(params()));
  drawCurve(r.objective);
  drawScatter(r.points);
  $("scores").innerHTML = `<h3>${r.method}${r.converged ? "" : " (iteration limit reached)"}</h3>` + cmcTable(r);
});

$("compare").onclick = () => run("comparing", () => {
  const rows = JSON.parse(compareMethods(params()));
  $("scores").innerHTML = "<h3>Method comparison</h3><table><tr><th>method</th><th>MAP I2T</th><th>MAP T2I</th><th>average</th></tr>" +
    rows.map((r) => `<tr><td>${r.method}</td><td>${r.map_i2t.toFixed(4)}</td><td>${r.map_t2i.toFixed(4)}</td><td>${r.avg.toFixed(4)}</td></tr>`).join("") +
    "</table>";
});

$("graph").onclick = () => run("building graph", () => {
  const view = JSON.parse(semanticGraph(params()));
  drawHeat(view);
  $("scores").innerHTML = `<p>semantic graph over ${view.n} samples, mean degree ${view.mean_degree.toFixed(2)}</p>`;
});

init().then(() => status("ready"), (e) => status("failed to load wasm: " + e, true));
