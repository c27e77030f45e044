// Generated by `wasm-bindgen --target web` into ./pkg (see the README).
import init, { lambdaZeros, membershipMap, ssmDecay } from "./pkg/spin2_demo.js";

const $ = (id) => document.getElementById(id);

function guarded(errId, f) {
  return () => {
    $(errId).textContent = "";
    try {
      f();
    } catch (e) {
      $(errId).textContent = e.message ?? String(e);
    }
  };
}

function axes(ctx, w, h, x0, y0) {
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(0, y0); ctx.lineTo(w, y0);
  ctx.moveTo(x0, 0); ctx.lineTo(x0, h);
  ctx.stroke();
}

function plotZeros() {
  const roots = lambdaZeros($("z-graph").value, $("z-beta").value, $("z-gamma").value);
  const r = Number($("z-radius").value) || 4;
  const c = $("z-canvas"), ctx = c.getContext("2d");
  const s = c.width / (2 * r), mid = c.width / 2;
  ctx.clearRect(0, 0, c.width, c.height);
  axes(ctx, c.width, c.height, mid, mid);
  // positive real axis
  ctx.strokeStyle = "#4a4";
  ctx.lineWidth = 3;
  ctx.beginPath(); ctx.moveTo(mid, mid); ctx.lineTo(c.width, mid); ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = "#c22";
  let outside = 0;
  for (let i = 0; i < roots.length; i += 2) {
    const x = mid + roots[i] * s, y = mid - roots[i + 1] * s;
    if (x < 0 || x > c.width || y < 0 || y > c.height) { outside++; continue; }
    ctx.beginPath(); ctx.arc(x, y, 3, 0, 2 * Math.PI); ctx.fill();
  }
  ctx.fillStyle = "#222";
  ctx.fillText(`${roots.length / 2} zeros, ${outside} outside view`, 6, 14);
}

const SET_COLOURS = ["#eee", "#6a9fd8", "#e39a4c", "#6cbf6c", "#b07cc6"];
const SET_NAMES = ["none", "S1", "S2", "S3", "S4"];

function plotMembership() {
  const steps = 80;
  const max = Number($("m-max").value);
  const cells = membershipMap(Number($("m-lambda").value), Number($("m-degree").value), max, max, steps);
  const c = $("m-canvas"), ctx = c.getContext("2d");
  const w = c.width / steps;
  for (let j = 0; j < steps; j++) {
    for (let i = 0; i < steps; i++) {
      ctx.fillStyle = SET_COLOURS[cells[j * steps + i]];
      // γ grows upwards
      ctx.fillRect(i * w, c.height - (j + 1) * w, Math.ceil(w), Math.ceil(w));
    }
  }
  ctx.fillStyle = "#222";
  ctx.fillText("β →", c.width - 30, c.height - 4);
  ctx.fillText("γ ↑", 4, 12);
  $("m-legend").innerHTML = SET_NAMES.map((n, k) => `<span style="background:${SET_COLOURS[k]}"></span>${n}`).join("");
}

function plotDecay() {
  const flat = ssmDecay($("s-graph").value, $("s-beta").value, $("s-gamma").value, $("s-lambda").value);
  const pts = [];
  for (let i = 0; i < flat.length; i += 2) if (flat[i + 1] > 0) pts.push([flat[i], Math.log10(flat[i + 1])]);
  const c = $("s-canvas"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  if (pts.length === 0) { ctx.fillText("all gaps are zero", 10, 20); return; }
  const dMax = Math.max(...pts.map((p) => p[0]));
  const lo = Math.min(...pts.map((p) => p[1])) - 0.5, hi = Math.max(...pts.map((p) => p[1])) + 0.5;
  const X = (d) => 30 + (d / Math.max(dMax, 1)) * (c.width - 40);
  const Y = (v) => 10 + ((hi - v) / (hi - lo)) * (c.height - 30);
  axes(ctx, c.width, c.height, 30, c.height - 20);
  ctx.strokeStyle = "#36c";
  ctx.beginPath();
  pts.forEach(([d, v], k) => (k ? ctx.lineTo(X(d), Y(v)) : ctx.moveTo(X(d), Y(v))));
  ctx.stroke();
  ctx.fillStyle = "#36c";
  for (const [d, v] of pts) { ctx.beginPath(); ctx.arc(X(d), Y(v), 3, 0, 2 * Math.PI); ctx.fill(); }
  ctx.fillStyle = "#222";
  ctx.fillText("log10 |gap| against distance", 36, 12);
  ctx.fillText(`${lo.toFixed(1)}`, 2, Y(lo));
  ctx.fillText(`${hi.toFixed(1)}`, 2, Y(hi) + 8);
}

await init();
$("z-run").onclick = guarded("z-err", plotZeros);
$("m-run").onclick = guarded("m-err", plotMembership);
$("s-run").onclick = guarded("s-err", plotDecay);
guarded("z-err", plotZeros)();
guarded("m-err", plotMembership)();
guarded("s-err", plotDecay)();
