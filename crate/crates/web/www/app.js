import init, { witness_grid, bounds_curve, independence } from "./pkg/kapfree_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function drawGrid() {
  const r = JSON.parse(witness_grid(num("w-p"), num("w-k"), num("w-s"), BigInt(num("w-seed"))));
  const grid = $("grid");
  grid.innerHTML = "";
  if (!r.ok) { $("w-summary").innerHTML = `<span class="bad">${r.error}</span>`; return; }
  if (!r.independent) {
    $("w-summary").textContent = `S = ${JSON.stringify(r.differences)} has dependent images; try another seed.`;
    return;
  }
  const diffs = new Set(r.differences.map(([x, y]) => `${x},${y}`));
  $("w-summary").innerHTML =
    `S = ${JSON.stringify(r.differences)}, |A| = ${r.size}/${r.total}, ` +
    (r.ap_free ? `no ${r.k}-AP with difference in S` : `<span class="bad">AP found</span>`);
  grid.style.gridTemplateColumns = `repeat(${r.p}, 22px)`;
  for (let y = r.p - 1; y >= 0; y--) {
    for (let x = 0; x < r.p; x++) {
      const cell = document.createElement("div");
      const q = r.values[y][x];
      cell.textContent = q;
      cell.title = `Q(${x},${y}) = ${q}`;
      if (q === 0) cell.classList.add("in");
      if (diffs.has(`${x},${y}`)) cell.classList.add("diff");
      grid.appendChild(cell);
    }
  }
}

function polyline(points, sx, sy, color) {
  const d = points.map(([x, y]) => `${sx(x).toFixed(1)},${sy(y).toFixed(1)}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="2" points="${d}"/>`;
}

function plotBounds() {
  const betaText = $("b-beta").value.trim();
  const beta = betaText === "" ? -1 : Number(betaText);
  const r = JSON.parse(bounds_curve(num("b-p"), num("b-k"), num("b-lo"), num("b-hi"), num("b-alpha"), beta, "default"));
  const svg = $("b-plot");
  if (!r.ok) { $("b-summary").innerHTML = `<span class="bad">${r.error}</span>`; svg.innerHTML = ""; return; }
  const rows = r.records;
  $("b-summary").textContent =
    `β = ${r.aggregates.beta}; e1 target met on ${r.aggregates.e1_ok_rows}/${rows.length} rows, ` +
    `e2 < −d·log_p n on ${r.aggregates.e2_ok_rows}/${rows.length}`;
  const sign = (v) => Math.sign(v) * Math.log10(1 + Math.abs(v));
  const xs = rows.map((row) => row.n);
  const ys = rows.flatMap((row) => [sign(row.e1), sign(row.e2)]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(0, ...ys)];
  const W = 720, H = 320, m = 30;
  const sx = (x) => m + ((x - x0) / Math.max(1, x1 - x0)) * (W - 2 * m);
  const sy = (y) => H - m - ((y - y0) / Math.max(1e-9, y1 - y0)) * (H - 2 * m);
  svg.innerHTML =
    `<line x1="${m}" x2="${W - m}" y1="${sy(0)}" y2="${sy(0)}" stroke="#999"/>` +
    polyline(rows.map((row) => [row.n, sign(row.e1)]), sx, sy, "#c33") +
    polyline(rows.map((row) => [row.n, sign(row.e2)]), sx, sy, "#36c") +
    `<text x="${m}" y="16" fill="#c33">e1 (signed log10)</text>` +
    `<text x="${m + 160}" y="16" fill="#36c">e2</text>`;
}

function runIndependence() {
  const r = JSON.parse(independence(num("i-p"), num("i-n"), num("i-k"), num("i-s"),
    BigInt(num("i-trials")), 7n, $("i-exact").checked));
  $("i-out").textContent = r.ok ? JSON.stringify(r.records[0], null, 2) : r.error;
}

await init();
$("w-run").onclick = drawGrid;
$("b-run").onclick = plotBounds;
$("i-run").onclick = runIndependence;
drawGrid();
plotBounds();
runIndependence();
