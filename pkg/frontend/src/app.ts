import { ApiClient } from "./api.js";
import { boardSvg, crossMarker } from "./board.js";
import { MatchController, renderScoreboard } from "./controller.js";
import { heatmapRects } from "./heatmap.js";
import type { Geometry } from "./types.js";

/** Browser bootstrap: wires the controller to a minimal DOM shell. */

const EQUILIBRIUM_COLOR = "#1565c0"; // blue cross: opponent-aware aim
const NS_COLOR = "#2e7d32"; // green cross: single-player aim

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function redraw(ctl: MatchController, geom: Geometry): Promise<void> {
  const view = renderScoreboard(ctl.currentState);
  el("score-a").textContent = String(view.scoreA);
  el("score-b").textContent = String(view.scoreB);
  el("thrower").textContent = `${view.thrower} to throw, ${view.dartsLeft} darts`;
  el("legs").textContent = `${view.leg} (${view.legs})`;
  el("banner").textContent = view.banner;
  if (ctl.currentState.complete) {
    el("board").innerHTML = boardSvg(geom);
    return;
  }
  const { recommendation, heatmap } = await ctl.advice();
  const overlays = [
    ...heatmapRects(heatmap),
    crossMarker(recommendation.ns, NS_COLOR),
    crossMarker(recommendation.equilibrium, EQUILIBRIUM_COLOR),
  ];
  el("board").innerHTML = boardSvg(geom, overlays);
  el("advice").textContent =
    `aim ${recommendation.equilibrium.label} ` +
    `(win ${(100 * recommendation.win_probability).toFixed(1)}%)`;
}

export async function main(baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl, (url, init) => fetch(url, init));
  const ctl = new MatchController(api);
  const geom = await api.geometry();
  const sols = await api.solutions();
  if (sols.length === 0) throw new Error("service has no solutions loaded");
  await ctl.start(sols[0].name, sols[sols.length - 1].name, 3);
  await redraw(ctl, geom);

  (el("dart-form") as HTMLFormElement).addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const input = el("dart-outcome") as HTMLInputElement;
    await ctl.dart(input.value.trim().toUpperCase());
    input.value = "";
    await redraw(ctl, geom);
  });

  (el("whatif-form") as HTMLFormElement).addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const s = Number((el("whatif-s") as HTMLInputElement).value);
    const opp = Number((el("whatif-opp") as HTMLInputElement).value);
    const rec = await ctl.whatIf({ thrower: "A", s, opp });
    el("whatif-result").textContent =
      `at ${s} vs ${opp}: aim ${rec.equilibrium.label}, ` +
      `win ${(100 * rec.win_probability).toFixed(1)}%`;
  });
}
