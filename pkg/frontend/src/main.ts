/** Composition root: wires the protocol client to the views. */

import { DetailView, downloadCsv } from "./detail.js";
import {
  applyEvent,
  bestDffSeries,
  clampWeight,
  describeCounters,
  findOutliers,
  initialViewState,
  scatterPoints,
  setAxes,
  WEIGHT_MAX,
  WEIGHT_MIN,
  WEIGHT_STEP,
  type ViewState,
} from "./model.js";
import { browserSocket, ProtocolClient } from "./protocol.js";
import { ScatterView } from "./scatter.js";
import { OBJECTIVE_TAGS, type EventPayload, type ObjectiveTag } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
};

let state: ViewState = initialViewState();
const url = `ws://${location.host}/ws`;
const client = new ProtocolClient(browserSocket(url));
const scatter = new ScatterView($("scatter") as unknown as HTMLCanvasElement);
const detail = new DetailView($("detail") as unknown as HTMLCanvasElement);

function toast(message: string): void {
  const el = $("toast");
  el.textContent = message;
  el.classList.add("visible");
  setTimeout(() => el.classList.remove("visible"), 3500);
}

function sliderValues(): Record<string, number> {
  const weights: Record<string, number> = {};
  for (const tag of OBJECTIVE_TAGS) {
    const input = $(`w-${tag}`) as HTMLInputElement;
    weights[tag] = clampWeight(parseFloat(input.value));
  }
  return weights;
}

function buildSliders(): void {
  const host = $("sliders");
  for (const tag of OBJECTIVE_TAGS) {
    const row = document.createElement("div");
    row.className = "slider-row";
    const label = document.createElement("label");
    label.textContent = tag;
    label.htmlFor = `w-${tag}`;
    const input = document.createElement("input");
    input.type = "range";
    input.id = `w-${tag}`;
    input.min = String(WEIGHT_MIN);
    input.max = String(WEIGHT_MAX);
    input.step = String(WEIGHT_STEP);
    input.value = "1";
    const value = document.createElement("span");
    value.id = `wv-${tag}`;
    value.textContent = "1.0";
    input.addEventListener("input", () => {
      value.textContent = clampWeight(parseFloat(input.value)).toFixed(1);
    });
    row.append(label, input, value);
    host.append(row);
  }
}

function buildAxisSelectors(): void {
  for (const axis of ["x", "y"] as const) {
    const select = $(`axis-${axis}`) as HTMLSelectElement;
    for (const tag of OBJECTIVE_TAGS) {
      const opt = document.createElement("option");
      opt.value = tag;
      opt.textContent = tag;
      select.append(opt);
    }
    select.value = state.axes[axis];
    select.addEventListener("change", () => {
      const next = { ...state.axes, [axis]: select.value as ObjectiveTag };
      state = setAxes(state, next);
      select.value = state.axes[axis]; // reverts an invalid (duplicate) pick
      redraw(); // axis changes re-render client-side, no service round trip
    });
  }
}

function setControlsEnabled(enabled: boolean): void {
  for (const id of ["continue", "stop", "export"]) {
    ($(id) as HTMLButtonElement).disabled = !enabled;
  }
}

function redraw(): void {
  $("connection").textContent = state.connected ? "connected" : "disconnected";
  $("connection").className = state.connected ? "ok" : "bad";
  const event = state.event;
  if (!event) return;
  scatter.render(
    scatterPoints(event, state.axes),
    findOutliers(event, state.axes),
    { x: state.axes.x, y: state.axes.y },
  );
  $("counters").textContent = describeCounters(event);
  const outliers = findOutliers(event, state.axes);
  $("outliers").innerHTML = outliers
    .map((o) => `<li>#${o.cid}: ${o.kind} on <b>${o.objective}</b></li>`)
    .join("");
  const series = bestDffSeries(state.history);
  $("progress").textContent =
    "best DFF: " + series.map((v) => v.toFixed(2)).join(" → ");
}

async function onEvent(event: EventPayload): Promise<void> {
  state = applyEvent(state, event);
  setControlsEnabled(true);
  redraw();
}

async function selectCandidate(cid: number): Promise<void> {
  try {
    const resp = await client.candidateDetail(cid);
    state = { ...state, selectedCid: cid };
    if (resp.detail) {
      detail.render(resp.detail);
      $("selected").textContent = `candidate #${cid} (dff ${resp.detail.dff.toFixed(3)})`;
    }
  } catch (err) {
    state = { ...state, selectedCid: null };
    detail.clear();
    toast(String(err));
  }
}

async function main(): Promise<void> {
  buildSliders();
  buildAxisSelectors();
  setControlsEnabled(false);
  client.onConnectionChange = (connected) => {
    state = { ...state, connected };
    redraw();
  };
  client.onEvent = (event) => void onEvent(event);
  scatter.onSelect = (cid) => void selectCandidate(cid);

  $("start").addEventListener("click", async () => {
    try {
      const select = $("version") as HTMLSelectElement;
      const resp = await client.start({
        version_id: parseInt(select.value, 10),
        de: { seed: Math.floor(Math.random() * 1e9) },
      });
      if (resp.event) await onEvent(resp.event);
      ($("start") as HTMLButtonElement).disabled = true;
      select.disabled = true;
      // a reload with ?session=<id> re-attaches to this session
      if (client.sessionId) {
        history.replaceState(null, "", `?session=${client.sessionId}`);
      }
    } catch (err) {
      toast(String(err));
    }
  });

  $("continue").addEventListener("click", async () => {
    if (client.busy) return; // double click guard
    setControlsEnabled(false);
    try {
      await client.setWeights(sliderValues());
      await client.runSegment(); // completion arrives as a pushed event
    } catch (err) {
      setControlsEnabled(true);
      toast(String(err));
    }
  });

  $("stop").addEventListener("click", async () => {
    try {
      const resp = await client.stop();
      setControlsEnabled(false);
      const log = resp.log as { counters?: Record<string, number> } | undefined;
      $("progress").textContent =
        "stopped. " + JSON.stringify(log?.counters ?? {});
    } catch (err) {
      toast(String(err));
    }
  });

  $("export").addEventListener("click", async () => {
    if (state.selectedCid === null) {
      toast("select a candidate first");
      return;
    }
    try {
      const resp = await client.exportCandidate(state.selectedCid);
      if (resp.csv) downloadCsv(`candidate_${state.selectedCid}.csv`, resp.csv);
    } catch (err) {
      toast(String(err));
    }
  });

  // populate the version picker once connected; re-attach if the URL
  // names an existing session (the view derives from its last event)
  client.onConnectionChange = (connected) => {
    state = { ...state, connected };
    redraw();
    if (!connected) return;
    void client.listVersions().then((resp) => {
      const select = $("version") as HTMLSelectElement;
      select.innerHTML = "";
      for (const v of resp.versions ?? []) {
        const opt = document.createElement("option");
        opt.value = String(v.version_id);
        opt.textContent = v.label;
        select.append(opt);
      }
    });
    const attach = new URLSearchParams(location.search).get("session");
    if (attach && client.sessionId === null) {
      client.sessionId = attach;
      void client
        .status()
        .then(async (resp) => {
          const last = (resp.status as { last_event?: EventPayload } | undefined)?.last_event;
          if (last) {
            await onEvent(last);
            ($("start") as HTMLButtonElement).disabled = true;
          }
        })
        .catch((err) => {
          client.sessionId = null;
          toast(`re-attach failed: ${err}`);
        });
    }
  };
}

main();
