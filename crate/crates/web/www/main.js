import init, { builtin, simulate, potential_grid, basin } from "./pkg/chamberflow_web.js";

const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const out = document.getElementById("out");
const text = document.getElementById("scenario");
const N = 140;
let view = { cx: 0, cy: 0, r: 3 };

const toPixel = ([x, y]) => [
  ((x - view.cx + view.r) / (2 * view.r)) * canvas.width,
  ((view.cy + view.r - y) / (2 * view.r)) * canvas.height,
];
const toWorld = (px, py) => [
  view.cx - view.r + (px / canvas.width) * 2 * view.r,
  view.cy + view.r - (py / canvas.height) * 2 * view.r,
];

function centre() {
  const doc = JSON.parse(text.value);
  // Centre the view between the origin and the corner of the first two walls.
  const walls = doc.radials.filter((r) => r.m_plus > 0);
  if (walls.length >= 2) {
    const [a, b] = walls;
    const det = a.root[0] * b.root[1] - a.root[1] * b.root[0];
    if (Math.abs(det) > 1e-12) {
      view.cx = (a.d_plus * b.root[1] - b.d_plus * a.root[1]) / det / 2;
      view.cy = (a.root[0] * b.d_plus - b.root[0] * a.d_plus) / det / 2;
      return;
    }
  }
  view.cx = 0;
  view.cy = 0;
}

function draw() {
  view.r = Number(document.getElementById("extent").value) || 3;
  centre();
  const grid = JSON.parse(
    potential_grid(text.value, view.cx - view.r, view.cx + view.r, view.cy - view.r, view.cy + view.r, N, N),
  );
  const vals = grid.values.filter((v) => v !== null);
  const lo = Math.min(...vals);
  const hi = Math.min(Math.max(...vals), lo + 12);
  const img = ctx.createImageData(N, N);
  grid.values.forEach((v, k) => {
    const i = k % N;
    const j = N - 1 - Math.floor(k / N);
    const p = 4 * (j * N + i);
    if (v === null) {
      img.data.set([235, 235, 235, 255], p);
    } else {
      const s = Math.min(1, (v - lo) / (hi - lo));
      const band = Math.abs(((v - lo) * 2) % 1 - 0.5) < 0.04 ? 0.8 : 1;
      img.data.set([255 * s * band, 90 * band, 255 * (1 - s) * band, 255], p);
    }
  });
  const tmp = new OffscreenCanvas(N, N);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function polyline(points, colour, width = 2) {
  ctx.strokeStyle = colour;
  ctx.lineWidth = width;
  ctx.beginPath();
  points.forEach((w, k) => {
    const [x, y] = toPixel(w);
    k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function dot(w, colour) {
  const [x, y] = toPixel(w);
  ctx.fillStyle = colour;
  ctx.beginPath();
  ctx.arc(x, y, 4, 0, 2 * Math.PI);
  ctx.fill();
}

function report(obj) {
  out.textContent = JSON.stringify(obj, (k, v) => (typeof v === "number" ? Number(v.toPrecision(8)) : v), 2);
}

canvas.addEventListener("click", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const w = toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  try {
    if (ev.shiftKey) {
      const span = Number(document.getElementById("span").value) || 12;
      const r = JSON.parse(basin(text.value, new Float64Array(w), span));
      polyline(r.points, "#fff", 3);
      dot(r.target, "#000");
      report({ target: r.target, stratum: r.stratum, points: r.points.length, checks: r.checks });
    } else {
      const r = JSON.parse(simulate(text.value, new Float64Array(w)));
      polyline(r.w, "#111");
      if (r.w_limit) dot(r.w_limit, "#ff0");
      report({ start: w, status: r.status, T: r.T, w_limit: r.w_limit, stratum: r.stratum, type_one: r.type_one });
    }
  } catch (e) {
    out.textContent = String(e);
  }
});

function loadBuiltin() {
  const name = document.getElementById("builtin").value;
  const params = document.getElementById("params").value.split(",").filter((s) => s.trim()).map(Number);
  text.value = JSON.stringify(JSON.parse(builtin(name, new Float64Array(params))), null, 2);
  draw();
}

document.getElementById("load").addEventListener("click", loadBuiltin);
document.getElementById("redraw").addEventListener("click", () => {
  try {
    draw();
  } catch (e) {
    out.textContent = String(e);
  }
});

await init();
loadBuiltin();
