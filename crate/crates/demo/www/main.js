import init, { planckSpectrum, homogeneousRelaxation, marshakProfile } from "./pkg/ugkp_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

// series: [{ label, x, y, dashed }]; logX/logY plot log10 of positive values only
function plot(canvas, series, { xLabel = "", yLabel = "", logX = false, logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = { l: 70, r: 20, t: 28, b: 40 };
  ctx.clearRect(0, 0, width, height);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const ok = (x, y) => Number.isFinite(tx(x)) && Number.isFinite(ty(y));
  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (const s of series) {
    s.x.forEach((x, k) => {
      if (!ok(x, s.y[k])) return;
      x0 = Math.min(x0, tx(x)); x1 = Math.max(x1, tx(x));
      y0 = Math.min(y0, ty(s.y[k])); y1 = Math.max(y1, ty(s.y[k]));
    });
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  const px = (v) => pad.l + ((tx(v) - x0) / (x1 - x0)) * (width - pad.l - pad.r);
  const py = (v) => height - pad.b - ((ty(v) - y0) / (y1 - y0)) * (height - pad.t - pad.b);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad.l, pad.t, width - pad.l - pad.r, height - pad.t - pad.b);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const fmt = (v, log) => (log ? `1e${v.toFixed(1)}` : Math.abs(v) < 1e-3 && v !== 0 ? v.toExponential(1) : +v.toPrecision(3));
  for (let k = 0; k <= 4; k++) {
    const xv = x0 + ((x1 - x0) * k) / 4;
    const yv = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(fmt(xv, logX), pad.l + ((width - pad.l - pad.r) * k) / 4 - 12, height - pad.b + 14);
    ctx.fillText(fmt(yv, logY), 4, height - pad.b - ((height - pad.t - pad.b) * k) / 4 + 4);
  }
  ctx.fillText(xLabel, width / 2 - 20, height - 6);
  ctx.fillText(yLabel, 4, 14);

  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(s.dashed ? [6, 4] : []);
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    let pen = false;
    s.x.forEach((x, k) => {
      if (!ok(x, s.y[k])) { pen = false; return; }
      pen ? ctx.lineTo(px(x), py(s.y[k])) : ctx.moveTo(px(x), py(s.y[k]));
      pen = true;
    });
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.label, width - pad.r - 200, pad.t + 14 + 14 * i);
  });
}

function inputs(section) {
  const out = {};
  for (const el of section.querySelectorAll("input")) out[el.name] = Number(el.value);
  return out;
}

function wire(id, action) {
  const section = document.getElementById(id);
  const status = section.querySelector(".status");
  const run = () => {
    status.textContent = "running...";
    // let the status repaint before the synchronous solve
    setTimeout(() => {
      const t0 = performance.now();
      try {
        const note = action(section, inputs(section));
        status.textContent = `${note}\n${(performance.now() - t0).toFixed(0)} ms`;
      } catch (e) {
        status.textContent = `error: ${e.message ?? e}`;
      }
    }, 10);
  };
  section.querySelector("button").addEventListener("click", run);
  return run;
}

const runs = [
  wire("spectrum", (s, p) => {
    const r = JSON.parse(planckSpectrum(p.t, p.uMax, 400, p.sigmaLow, p.sigmaHigh, p.uSplit));
    plot(s.querySelector("canvas"), [{ label: `B(u, T = ${p.t})`, x: r.u, y: r.b }], { xLabel: "u (keV)" });
    return `Planck mean ${r.planck_mean.toPrecision(6)} /cm, Rosseland mean ${r.rosseland_mean.toPrecision(6)} /cm`;
  }),
  wire("relaxation", (s, p) => {
    const r = JSON.parse(homogeneousRelaxation(p.perCell, p.tEnd, p.seed));
    plot(
      s.querySelector(".history"),
      [
        { label: "material T", x: r.time, y: r.t },
        { label: "radiation T", x: r.time, y: r.tr },
        { label: "multigroup reference T", x: r.oracle_time, y: r.oracle_t, dashed: true },
      ],
      { xLabel: "t (ns)", yLabel: "keV" },
    );
    plot(
      s.querySelector(".spectrum"),
      [
        { label: "particles", x: r.u, y: r.intensity },
        { label: "multigroup reference", x: r.u, y: r.oracle_intensity, dashed: true },
      ],
      { xLabel: "u (keV)", yLabel: "intensity", logX: true, logY: true },
    );
    const last = r.t.length - 1;
    return `T(${p.tEnd} ns) = ${r.t[last].toFixed(6)} keV, reference ${r.oracle_t[r.oracle_t.length - 1].toFixed(6)} keV`;
  }),
  wire("marshak", (s, p) => {
    const r = JSON.parse(marshakProfile(p.nx, p.length, p.sigma0, p.tEnd));
    plot(
      s.querySelector("canvas"),
      [
        { label: "material T", x: r.x, y: r.t },
        { label: "radiation T", x: r.x, y: r.tr },
        { label: "Rosseland diffusion T", x: r.x, y: r.diffusion_t, dashed: true },
      ],
      { xLabel: "x (cm)", yLabel: "keV" },
    );
    return `${p.nx} cells, profile at ${p.tEnd} ns`;
  }),
];

await init();
runs.forEach((run) => run());
