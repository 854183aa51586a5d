import init, { features, corpus_add, rank, rank_matrix, sample_corpus } from "./pkg/hue_rank_wasm.js";

const $ = (id) => document.getElementById(id);
const ARITY = { pm1: [1, 1], pm2: [2, 2], pm3: [3, 3], pm4: [3, 3], pm5: [1, 3] };
const STATS = ["mean_r", "mean_g", "mean_b", "median_r", "median_g", "median_b", "std_r", "std_g", "std_b"];

let corpus = "";

function names() {
  return corpus.trim().split("\n").slice(1).map((l) => l.split(",")[0]);
}

function fillTable(table, header, rows, rowClass) {
  table.replaceChildren();
  const head = table.insertRow();
  for (const h of header) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  rows.forEach((cells, i) => {
    const tr = table.insertRow();
    if (rowClass) tr.className = rowClass(i);
    for (const c of cells) tr.insertCell().textContent = c;
  });
}

function drawHistogram(bins) {
  const c = $("hist").getContext("2d");
  const max = Math.max(...bins, 1);
  c.clearRect(0, 0, 256, 100);
  c.fillStyle = "#555";
  bins.forEach((v, i) => {
    const h = (v / max) * 100;
    c.fillRect(i, 100 - h, 1, h);
  });
}

function refreshQueryList(select) {
  const sel = $("query");
  const keep = select ?? sel.value;
  sel.replaceChildren(...names().map((n) => new Option(n, n)));
  if (names().includes(keep)) sel.value = keep;
}

function selectedChannels() {
  return [...document.querySelectorAll(".ch")].filter((c) => c.checked).map((c) => c.value).join("");
}

// Keep the checkbox count inside the method's arity.
function enforceArity(changed) {
  const [lo, hi] = ARITY[$("method").value];
  const boxes = [...document.querySelectorAll(".ch")];
  let on = boxes.filter((b) => b.checked);
  while (on.length > hi) {
    const drop = on.find((b) => b !== changed) ?? on[0];
    drop.checked = false;
    on = boxes.filter((b) => b.checked);
  }
  for (const b of boxes) {
    if (on.length >= lo) break;
    if (!b.checked) {
      b.checked = true;
      on.push(b);
    }
  }
}

function runQuery() {
  $("dfval").textContent = $("df").value;
  $("qerr").textContent = "";
  const q = $("query").value;
  if (!q) return;
  try {
    const out = JSON.parse(
      rank(corpus, q, $("method").value, selectedChannels(), Number($("df").value), $("scope").value, 50),
    );
    fillTable(
      $("results"),
      ["rank", "name", "score"],
      out.results.map((r) => [r.rank, r.name, r.score.toFixed(6)]),
      (i) => (out.results[i].name === out.query ? "query" : ""),
    );
    $("excluded").textContent = `${out.excluded} image(s) beyond DF`;
  } catch (e) {
    $("results").replaceChildren();
    $("excluded").textContent = "";
    $("qerr").textContent = e.message ?? String(e);
  }
}

function runMatrix() {
  const m = JSON.parse(rank_matrix(corpus));
  fillTable($("matrix"), ["name", ...m.columns], m.names.map((n, i) => [n, ...m.ranks[i]]));
}

async function loadImage(file) {
  const bitmap = await createImageBitmap(file);
  const canvas = $("preview");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d");
  ctx.drawImage(bitmap, 0, 0);
  const { data } = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  const name = file.name.replace(/[,"\r\n]/g, "_");
  const json = features(name, bitmap.width, bitmap.height, data);
  const out = JSON.parse(json);
  drawHistogram(out.gray_histogram);
  const f = out.features;
  fillTable(
    $("features"),
    ["feature", "value"],
    [["size", `${f.width}x${f.height}`], ["threshold", f.threshold], ...STATS.map((k) => [k, f[k].toFixed(4)])],
  );
  corpus = corpus_add(corpus, json);
  return name;
}

async function main() {
  await init();
  corpus = sample_corpus();
  refreshQueryList();

  $("file").addEventListener("change", async (ev) => {
    let last;
    for (const file of ev.target.files) {
      try {
        last = await loadImage(file);
      } catch (e) {
        $("qerr").textContent = `${file.name}: ${e.message ?? e}`;
      }
    }
    refreshQueryList(last);
    runQuery();
    runMatrix();
  });
  $("method").addEventListener("change", () => {
    enforceArity();
    runQuery();
  });
  for (const b of document.querySelectorAll(".ch")) {
    b.addEventListener("change", () => {
      enforceArity(b);
      runQuery();
    });
  }
  for (const id of ["query", "scope", "df"]) $(id).addEventListener("input", runQuery);

  runQuery();
  runMatrix();
}

main();
