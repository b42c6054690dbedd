import init, { vectorField, demoTrajectory, classifyPoint, counterexampleCurve } from "./pkg/simplex_mwu_web.js";

const MAXIMA = [[0, Math.PI / 12], [Math.PI / 4, Math.PI / 12], [Math.PI / 8, Math.PI / 4]];
const fieldCanvas = document.getElementById("field");
const ratioCanvas = document.getElementById("ratio");
const status = document.getElementById("status");
const witnessBox = document.getElementById("witness");

const PAD = 20;
const toPx = (c, v, flip) => {
  const size = (flip ? c.height : c.width) - 2 * PAD;
  return flip ? c.height - PAD - v * size : PAD + v * size;
};

function drawField() {
  const eps = Number(document.getElementById("eps").value);
  const grid = Number(document.getElementById("grid").value);
  const ctx = fieldCanvas.getContext("2d");
  ctx.clearRect(0, 0, fieldCanvas.width, fieldCanvas.height);
  ctx.strokeRect(PAD, PAD, fieldCanvas.width - 2 * PAD, fieldCanvas.height - 2 * PAD);
  let data;
  try {
    data = vectorField(grid, eps);
  } catch (e) {
    status.textContent = String(e);
    return;
  }
  let longest = 0;
  for (let i = 0; i < data.length; i += 4) longest = Math.max(longest, Math.hypot(data[i + 2], data[i + 3]));
  const cell = (fieldCanvas.width - 2 * PAD) / (grid + 1);
  const scale = longest > 0 ? 0.9 * cell / longest : 0;
  ctx.strokeStyle = "#4a6fa5";
  for (let i = 0; i < data.length; i += 4) {
    const [x, y, dx, dy] = [data[i], data[i + 1], data[i + 2], data[i + 3]];
    const px = toPx(fieldCanvas, x, false), py = toPx(fieldCanvas, y, true);
    const ex = px + dx * scale * (fieldCanvas.width - 2 * PAD), ey = py - dy * scale * (fieldCanvas.height - 2 * PAD);
    ctx.beginPath(); ctx.moveTo(px, py); ctx.lineTo(ex, ey); ctx.stroke();
    ctx.fillStyle = "#4a6fa5"; ctx.fillRect(ex - 1, ey - 1, 2, 2);
  }
  ctx.fillStyle = "#c0392b";
  for (const [x, y] of MAXIMA) {
    ctx.beginPath(); ctx.arc(toPx(fieldCanvas, x, false), toPx(fieldCanvas, y, true), 5, 0, 2 * Math.PI); ctx.fill();
  }
  status.textContent = `ε = ${eps}, ${grid}×${grid} grid`;
}

function runFrom(event) {
  const rect = fieldCanvas.getBoundingClientRect();
  const size = fieldCanvas.width - 2 * PAD;
  const x = (event.clientX - rect.left - PAD) / size;
  const y = (fieldCanvas.height - PAD - (event.clientY - rect.top)) / size;
  const eps = Number(document.getElementById("eps").value);
  let path;
  try {
    path = demoTrajectory(x, y, eps, 100000, 1e-10);
  } catch (e) {
    status.textContent = String(e);
    return;
  }
  const ctx = fieldCanvas.getContext("2d");
  ctx.strokeStyle = "#e67e22"; ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(toPx(fieldCanvas, path[0], false), toPx(fieldCanvas, path[1], true));
  for (let i = 2; i < path.length; i += 2) ctx.lineTo(toPx(fieldCanvas, path[i], false), toPx(fieldCanvas, path[i + 1], true));
  ctx.stroke(); ctx.lineWidth = 1;
  const [ex, ey] = [path[path.length - 2], path[path.length - 1]];
  let verdict;
  try { verdict = classifyPoint(ex, ey, 1e-4); } catch (e) { verdict = String(e); }
  status.textContent = `start (${x.toFixed(3)}, ${y.toFixed(3)}) → (${ex.toFixed(5)}, ${ey.toFixed(5)}) `
    + `after ${path.length / 2 - 1} steps: ${verdict}`;
}

function drawCurve() {
  const grid = Number(document.getElementById("cgrid").value);
  let data;
  try {
    data = counterexampleCurve(grid);
  } catch (e) {
    witnessBox.textContent = String(e);
    return;
  }
  const table = data.subarray(0, 3 * grid);
  const [a, b, c, wx, wxp, tx, txp] = data.subarray(3 * grid);
  const ctx = ratioCanvas.getContext("2d");
  ctx.clearRect(0, 0, ratioCanvas.width, ratioCanvas.height);
  ctx.strokeStyle = "#999"; ctx.strokeRect(PAD, PAD, ratioCanvas.width - 2 * PAD, ratioCanvas.height - 2 * PAD);
  // log-scaled k on the vertical axis
  const logs = [];
  for (let i = 0; i < table.length; i += 3) logs.push(Math.log10(Math.max(table[i + 1], 1e-12)));
  const lo = Math.min(...logs), hi = Math.max(...logs);
  const ky = v => toPx(ratioCanvas, (Math.log10(v) - lo) / (hi - lo), true);
  ctx.strokeStyle = "#2c3e50"; ctx.beginPath();
  for (let i = 0; i < table.length; i += 3) {
    const px = toPx(ratioCanvas, table[i], false), py = ky(table[i + 1]);
    i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
  }
  ctx.stroke();
  const k = x => { const x2 = 1 - x; return (x + 7 * x ** 7 * x2) / (x ** 7 * x2 + 7 * x2 ** 7); };
  ctx.fillStyle = "#c0392b";
  for (const x of [a, b, c]) { ctx.beginPath(); ctx.arc(toPx(ratioCanvas, x, false), ky(k(x)), 4, 0, 2 * Math.PI); ctx.fill(); }
  ctx.fillStyle = "#27ae60";
  for (const x of [wx, wxp]) { ctx.beginPath(); ctx.arc(toPx(ratioCanvas, x, false), ky(k(x)), 4, 0, 2 * Math.PI); ctx.fill(); }
  witnessBox.textContent = `k(${a.toFixed(4)}) > k(${b.toFixed(4)}) < k(${c.toFixed(4)})   (red, log scale)\n`
    + `τ(${wx.toFixed(6)}) = ${tx.toFixed(12)}\nτ(${wxp.toFixed(6)}) = ${txp.toFixed(12)}   (green)`;
}

await init();
document.getElementById("redraw").addEventListener("click", drawField);
document.getElementById("curve").addEventListener("click", drawCurve);
fieldCanvas.addEventListener("click", runFrom);
drawField();
drawCurve();
