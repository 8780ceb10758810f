// Demo page wiring: drives the wasm module built by
//   wasm-pack build crates/demo --target web --out-dir www/pkg
import init, { Demo, guarantee_curve } from "./pkg/greediris_demo.js";

const $ = (id) => document.getElementById(id);
const net = $("net").getContext("2d");
const bucketsCtx = $("buckets").getContext("2d");
const curveCtx = $("curve").getContext("2d");

let demo = null;
let network = null;       // { n, edges, positions, out_degrees }
let selection = null;     // { seeds, ... }
let waveState = null;     // { waves, shown }
let animTimer = null;

const COL = {
  edge: "rgba(120,140,160,0.18)",
  node: "#3c4855",
  seed: "#ff6b35",
  wave: "#4ec9b0",
  faded: "#232b33",
};

function setError(msg) { $("error").textContent = msg || ""; }

function px(p, canvas) {
  return [p[0] * canvas.width, p[1] * canvas.height];
}

function drawNetwork() {
  const canvas = net.canvas;
  net.clearRect(0, 0, canvas.width, canvas.height);
  if (!network) return;
  const pos = network.positions;

  net.strokeStyle = COL.edge;
  net.lineWidth = 1;
  net.beginPath();
  for (const [a, b] of network.edges) {
    const [x1, y1] = px(pos[a], canvas);
    const [x2, y2] = px(pos[b], canvas);
    net.moveTo(x1, y1);
    net.lineTo(x2, y2);
  }
  net.stroke();

  const activated = new Set();
  if (waveState) {
    for (let i = 0; i < waveState.shown; i++) {
      for (const v of waveState.waves[i]) activated.add(v);
    }
  }
  const seeds = new Set(selection ? selection.seeds : []);
  const maxDeg = Math.max(1, ...network.out_degrees);
  for (let v = 0; v < network.n; v++) {
    const [x, y] = px(pos[v], canvas);
    const r = 2 + 6 * Math.sqrt(network.out_degrees[v] / maxDeg);
    net.beginPath();
    net.arc(x, y, seeds.has(v) ? r + 2 : r, 0, Math.PI * 2);
    net.fillStyle = seeds.has(v) ? COL.seed : activated.has(v) ? COL.wave : COL.node;
    net.fill();
  }
  const parts = [];
  if (selection) parts.push(`${selection.seeds.length} seeds`);
  if (waveState) {
    const active = [...Array(waveState.shown).keys()]
      .reduce((acc, i) => acc + waveState.waves[i].length, 0);
    parts.push(`wave ${waveState.shown}/${waveState.waves.length}, ${active} active`);
  }
  $("status").textContent = parts.join(" · ");
}

function drawBuckets(occupancy, k) {
  const c = bucketsCtx.canvas;
  bucketsCtx.clearRect(0, 0, c.width, c.height);
  if (!occupancy || occupancy.length === 0) return;
  const w = c.width / occupancy.length;
  for (let i = 0; i < occupancy.length; i++) {
    const h = (occupancy[i] / Math.max(1, k)) * (c.height - 14);
    bucketsCtx.fillStyle = COL.wave;
    bucketsCtx.fillRect(i * w, c.height - h, Math.max(1, w - 1), h);
  }
  bucketsCtx.fillStyle = "#8b97a5";
  bucketsCtx.font = "10px system-ui";
  bucketsCtx.fillText(`${occupancy.length} buckets, seeds admitted per bucket (max k)`, 2, 10);
}

function drawCurve() {
  const c = curveCtx.canvas;
  curveCtx.clearRect(0, 0, c.width, c.height);
  const delta = parseFloat($("delta").value);
  const eps = parseFloat($("epsilon").value);
  let points;
  try {
    points = JSON.parse(guarantee_curve(delta, eps, 64));
  } catch {
    return;
  }
  const xs = points.map((p) => p.alpha);
  const ys = points.map((p) => p.guarantee);
  const lo = Math.min(0, ...ys), hi = Math.max(0.05, ...ys);
  const X = (a) => 6 + (a - xs[0]) / (1 - xs[0]) * (c.width - 12);
  const Y = (g) => c.height - 14 - ((g - lo) / (hi - lo)) * (c.height - 26);

  // zero line
  curveCtx.strokeStyle = "#2c3540";
  curveCtx.beginPath();
  curveCtx.moveTo(0, Y(0));
  curveCtx.lineTo(c.width, Y(0));
  curveCtx.stroke();

  curveCtx.strokeStyle = "#ffb454";
  curveCtx.beginPath();
  points.forEach((p, i) => {
    const x = X(p.alpha), y = Y(p.guarantee);
    if (i === 0) curveCtx.moveTo(x, y); else curveCtx.lineTo(x, y);
  });
  curveCtx.stroke();

  const alpha = parseFloat($("alpha").value);
  const here = points.reduce((a, b) =>
    Math.abs(b.alpha - alpha) < Math.abs(a.alpha - alpha) ? b : a);
  curveCtx.fillStyle = "#ff6b35";
  curveCtx.beginPath();
  curveCtx.arc(X(here.alpha), Y(here.guarantee), 3.5, 0, Math.PI * 2);
  curveCtx.fill();
  curveCtx.fillStyle = "#8b97a5";
  curveCtx.font = "10px system-ui";
  curveCtx.fillText(`α=${here.alpha.toFixed(2)} → ${here.guarantee.toFixed(3)}`, 6, 10);
}

function stopAnimation() {
  if (animTimer) { clearInterval(animTimer); animTimer = null; }
}

function generate() {
  setError("");
  stopAnimation();
  try {
    const text = demo.generate_network(
      parseInt($("n").value), parseInt($("attach").value),
      $("model").value, parseFloat($("whi").value), parseInt($("gseed").value));
    network = JSON.parse(text);
    selection = null;
    waveState = null;
    $("netinfo").textContent = `— ${network.n} vertices, ${network.edge_count} directed edges`;
    $("select").disabled = false;
    $("simulate").disabled = true;
    for (const id of ["cov", "conv", "theta", "wc", "inf"]) $(id).textContent = "—";
    $("rounds").querySelector("tbody").innerHTML = "";
    drawBuckets([], 1);
    drawNetwork();
  } catch (e) { setError(String(e)); }
}

function select() {
  setError("");
  stopAnimation();
  waveState = null;
  try {
    const text = demo.select_seeds(
      parseInt($("k").value), parseFloat($("epsilon").value),
      parseFloat($("delta").value), parseFloat($("alpha").value),
      parseInt($("workers").value), parseInt($("gseed").value));
    selection = JSON.parse(text);
    $("cov").textContent = `${selection.coverage} / ${selection.universe}`;
    $("conv").textContent = selection.converged ? "yes" : "no (round budget hit)";
    $("theta").textContent = selection.final_theta.toLocaleString();
    $("wc").textContent = selection.worst_case_guarantee.toFixed(4);
    $("inf").textContent = "—";
    const body = $("rounds").querySelector("tbody");
    body.innerHTML = "";
    for (const r of selection.rounds) {
      const tr = document.createElement("tr");
      if (r.passed) tr.className = "pass";
      tr.innerHTML = `<td>${r.round}</td><td>${r.theta_hat}</td><td>${r.coverage}</td><td>${r.lower_bound.toFixed(1)}</td>`;
      body.appendChild(tr);
    }
    drawBuckets(selection.bucket_occupancy, parseInt($("k").value));
    $("simulate").disabled = false;
    drawNetwork();
  } catch (e) { setError(String(e)); }
}

function simulate() {
  setError("");
  stopAnimation();
  try {
    const text = demo.simulate_cascade(
      parseInt($("trials").value), (Math.random() * 1e9) | 0);
    const result = JSON.parse(text);
    $("inf").textContent = `${result.mean.toFixed(1)} ± ${result.stderr.toFixed(1)} (${result.trials} trials)`;
    waveState = { waves: result.waves, shown: 0 };
    animTimer = setInterval(() => {
      waveState.shown += 1;
      drawNetwork();
      if (waveState.shown >= waveState.waves.length) stopAnimation();
    }, 280);
  } catch (e) { setError(String(e)); }
}

init().then(() => {
  demo = new Demo();
  $("generate").addEventListener("click", generate);
  $("select").addEventListener("click", select);
  $("simulate").addEventListener("click", simulate);
  $("alpha").addEventListener("input", () => {
    $("alphav").textContent = parseFloat($("alpha").value).toFixed(2);
    drawCurve();
  });
  for (const id of ["delta", "epsilon"]) $(id).addEventListener("change", drawCurve);
  drawCurve();
  generate();
}).catch((e) => setError("wasm failed to load: " + e));
