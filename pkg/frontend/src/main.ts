/** Browser entry point: render the review queue, wire verdicts and polling. */

import { ReviewApi } from "./api.js";
import { decodePpm } from "./ppm.js";
import { ReviewSession } from "./session.js";
import type { ReviewItemView } from "./types.js";

const STATS_POLL_MS = 3000;
const DEFAULT_LIMIT = 50;

const api = new ReviewApi("");
const session = new ReviewSession(api);

const el = {
  queue: document.getElementById("queue")!,
  stats: document.getElementById("stats")!,
  error: document.getElementById("error")!,
  loadMore: document.getElementById("load-more") as HTMLButtonElement,
  reload: document.getElementById("reload") as HTMLButtonElement,
  limit: document.getElementById("limit") as HTMLInputElement,
};

let currentLimit = DEFAULT_LIMIT;

function renderError(): void {
  el.error.textContent = session.state.lastError ?? "";
  el.error.classList.toggle("hidden", session.state.lastError === null);
}

function renderStats(): void {
  const stats = session.state.stats;
  if (!stats) {
    el.stats.textContent = "no stats yet";
    return;
  }
  const stale = session.state.statsStale ? ' <span class="badge stale">stale</span>' : "";
  const statusCells = Object.entries(stats.by_status)
    .map(([name, count]) => `<td><b>${count}</b><br>${name}</td>`)
    .join("");
  const domains = Object.entries(stats.by_domain)
    .map(([name, count]) => `${name}: ${count}`)
    .join(" · ");
  el.stats.innerHTML =
    `<h2>pipeline${stale}</h2><table><tr>${statusCells}</tr></table>` +
    `<p>${domains || "no records"} — total ${stats.total}</p>` +
    `<p>${session.state.history.length} verdict(s) this session</p>`;
}

async function attachPreview(container: HTMLElement, item: ReviewItemView): Promise<void> {
  const url = item.preview_urls[0];
  if (!url) return;
  try {
    const { mime, bytes } = await api.fetchMedia(url);
    if (mime.includes("portable-pixmap")) {
      const decoded = decodePpm(bytes);
      const canvas = document.createElement("canvas");
      canvas.width = decoded.width;
      canvas.height = decoded.height;
      canvas.className = "preview";
      const ctx = canvas.getContext("2d");
      if (ctx) ctx.putImageData(new ImageData(decoded.rgba, decoded.width, decoded.height), 0, 0);
      container.appendChild(canvas);
    } else {
      const img = document.createElement("img");
      img.className = "preview";
      img.src = URL.createObjectURL(new Blob([bytes.slice().buffer], { type: mime }));
      container.appendChild(img);
    }
  } catch {
    const missing = document.createElement("span");
    missing.className = "preview missing";
    missing.textContent = "no preview";
    container.appendChild(missing);
  }
}

function firstClassId(): string | null {
  const first = session.state.queue[0];
  return first ? first.class_id : null;
}

async function verdict(classId: string, value: "good" | "bad"): Promise<void> {
  const note = (document.getElementById(`note-${classId}`) as HTMLInputElement | null)?.value ?? "";
  const affected = await session.submitVerdict(classId, value, note);
  if (affected === null && session.state.verdictInFlight(classId)) {
    return; // duplicate submit while the first is in flight: idempotent no-op
  }
  renderAll();
}

function renderQueue(): void {
  el.queue.textContent = "";
  const groups = session.state.classGroups();
  if (groups.size === 0) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "Nothing waiting for review. Run qa-sample, then reload.";
    el.queue.appendChild(empty);
    return;
  }
  for (const [classId, items] of groups) {
    const box = document.createElement("section");
    box.className = "class-group";
    const head = document.createElement("header");
    head.innerHTML = `<h3>${classId}</h3><span>${items.length} item(s), domain ${items[0]!.domain}</span>`;
    const good = document.createElement("button");
    good.textContent = "good (g)";
    good.className = "good";
    good.onclick = () => void verdict(classId, "good");
    const bad = document.createElement("button");
    bad.textContent = "bad (b)";
    bad.className = "bad";
    bad.onclick = () => void verdict(classId, "bad");
    const note = document.createElement("input");
    note.id = `note-${classId}`;
    note.placeholder = "reviewer note";
    head.append(good, bad, note);
    box.appendChild(head);
    for (const item of items) {
      const row = document.createElement("div");
      row.className = "item";
      const media = document.createElement("div");
      media.className = "media";
      void attachPreview(media, item);
      const text = document.createElement("div");
      text.className = "caption";
      const captionNode = document.createElement("p");
      captionNode.textContent = item.caption; // byte-identical, never trimmed
      const meta = document.createElement("small");
      meta.textContent = `${item.id} · attempt ${item.attempt} · ${item.question}`;
      text.append(captionNode, meta);
      row.append(media, text);
      box.appendChild(row);
    }
    el.queue.appendChild(box);
  }
}

function renderAll(): void {
  renderQueue();
  renderStats();
  renderError();
  el.loadMore.disabled = session.state.queue.length < currentLimit;
}

async function reload(): Promise<void> {
  currentLimit = Number(el.limit.value) || DEFAULT_LIMIT;
  await session.loadBatch(currentLimit);
  await session.refreshStats();
  renderAll();
}

el.reload.onclick = () => void reload();
el.loadMore.onclick = () => {
  currentLimit += DEFAULT_LIMIT;
  el.limit.value = String(currentLimit);
  void reload();
};

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement) return;
  const classId = firstClassId();
  if (!classId) return;
  if (event.key === "g") void verdict(classId, "good");
  if (event.key === "b") void verdict(classId, "bad");
});

setInterval(() => {
  void session.refreshStats().then(renderStats);
}, STATS_POLL_MS);

void reload();
