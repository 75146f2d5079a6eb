// Entry point: wires the API client, scene, playback, hover, and sidebar.
// Query parameters: ?doc=<document id>&base=<service url>&speed=<multiplier>

import { HttpApiClient } from "./api.js";
import { HoverController, selectEntity } from "./highlight.js";
import { ReaderSession } from "./player.js";
import { Renderer, renderSidebar } from "./render.js";
import { SceneModel } from "./scene.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const docId = params.get("doc");
  const base = params.get("base") ?? "";
  const speed = Number(params.get("speed") ?? "1");
  const status = document.getElementById("status")!;
  if (!docId) {
    status.textContent = "Pass ?doc=<document id> (and optionally &base=<service url>).";
    return;
  }
  const api = new HttpApiClient(base);
  status.textContent = "Loading…";
  const [doc, timeline, entities] = await Promise.all([
    api.document(docId),
    api.timeline(docId),
    api.entities(docId),
  ]);

  const scene = new SceneModel(doc);
  const hover = new HoverController(scene, api, docId);
  const session = new ReaderSession(scene, timeline, speed, undefined, (k) => {
    status.textContent = k >= timeline.blocks.length
      ? "All sentences revealed. Hover to explore; pick an entity to review."
      : `Sentence ${k} of ${timeline.blocks.length}. Click to continue.`;
  });

  new Renderer(
    scene,
    document.getElementById("graph")!,
    document.getElementById("text")!,
    {
      onNodeHover: (nodeId) => void hover.hoverNode(nodeId),
      onTextHover: (sentenceId, offset) => void hover.hoverText(sentenceId, offset),
      onTextLeave: () => void hover.hoverNode(null),
    },
  );
  renderSidebar(document.getElementById("sidebar")!, entities, scene, (nodeId) => {
    session.enqueue(() => void selectEntity(scene, api, docId, nodeId));
  });

  document.getElementById("graph")!.addEventListener("click", () => session.advance());
  status.textContent = `Ready: ${timeline.blocks.length} sentences. Click the canvas to begin.`;
}

void boot();
