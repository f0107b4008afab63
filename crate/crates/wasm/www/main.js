import init, { spectrum, bands, heatmap } from "./pkg/finitegap_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const tuple = (id) => new Uint32Array($(id).value.split(",").map((x) => parseInt(x, 10)));

function report(out, f) {
  try {
    f();
  } catch (e) {
    out.textContent = String(e);
  }
}

function frame(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();
}

function showRoots() {
  const out = $("q-out");
  report(out, () => {
    const s = spectrum(tuple("q-n"), num("q-re"), num("q-im"));
    const r = s.roots;
    const lines = [`genus ${s.genus}, ${s.classification}`];
    for (let i = 0; i < r.length; i += 2) lines.push(`${r[i].toPrecision(12)} ${r[i + 1] < 0 ? "-" : "+"} ${Math.abs(r[i + 1]).toExponential(3)}i`);
    out.textContent = lines.join("\n");

    const c = $("q-plot"), ctx = c.getContext("2d");
    frame(ctx, c.width, c.height);
    let m = 1;
    for (const x of r) m = Math.max(m, Math.abs(x));
    ctx.fillStyle = "#c33";
    for (let i = 0; i < r.length; i += 2) {
      const x = c.width / 2 + (r[i] / m) * (c.width / 2 - 10);
      const y = c.height / 2 - (r[i + 1] / m) * (c.height / 2 - 10);
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fill();
    }
  });
}

function showBands() {
  const out = $("b-out");
  report(out, () => {
    const lo = num("b-lo"), hi = num("b-hi");
    const d = bands(tuple("b-n"), num("b-b"), lo, hi, parseInt($("b-steps").value, 10));
    out.textContent = "edges: " + Array.from(d.edges, (x) => x.toPrecision(10)).join(", ");

    const c = $("b-plot"), ctx = c.getContext("2d");
    const w = c.width, h = c.height, ymax = 6;
    const px = (e) => ((e - lo) / (hi - lo)) * w;
    const py = (t) => h / 2 - (Math.max(-ymax, Math.min(ymax, t)) / ymax) * (h / 2);
    frame(ctx, w, h);
    ctx.fillStyle = "rgba(60,140,60,0.15)";
    ctx.fillRect(0, py(2), w, py(-2) - py(2));
    const E = d.energies, t = d.trace;
    ctx.strokeStyle = "#236";
    ctx.beginPath();
    for (let i = 0; i < E.length; i++) (i ? ctx.lineTo : ctx.moveTo).call(ctx, px(E[i]), py(t[i]));
    ctx.stroke();
    ctx.strokeStyle = "#c33";
    for (const e of d.edges) {
      ctx.beginPath();
      ctx.moveTo(px(e), 0);
      ctx.lineTo(px(e), h);
      ctx.stroke();
    }
  });
}

function showHeatmap() {
  const c = $("z-plot"), ctx = c.getContext("2d");
  const nx = 80, ny = 80;
  let v;
  try {
    v = heatmap(parseInt($("z-n").value, 10), num("z-r"), num("z-s"), -0.5, 0.5, nx, 0.3, 2.3, ny);
  } catch (e) {
    ctx.clearRect(0, 0, c.width, c.height);
    ctx.fillText(String(e), 10, 20);
    return;
  }
  // log scale, Im tau increasing upwards
  const logs = Array.from(v, (x) => Math.log10(x + 1e-12));
  const finite = logs.filter(Number.isFinite);
  const lo = Math.min(...finite), hi = Math.max(...finite);
  const img = ctx.createImageData(nx, ny);
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      const k = (ny - 1 - j) * nx + i;
      const t = Number.isFinite(logs[j * nx + i]) ? (logs[j * nx + i] - lo) / (hi - lo || 1) : 0;
      img.data.set([255 * t, 80, 255 * (1 - t), 255], 4 * k);
    }
  }
  const tmp = document.createElement("canvas");
  tmp.width = nx;
  tmp.height = ny;
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, c.width, c.height);
}

await init();
$("q-go").onclick = showRoots;
$("b-go").onclick = showBands;
$("z-go").onclick = showHeatmap;
