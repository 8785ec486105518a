import { AdvisorApi, FeatureValues, ServiceError } from "./types.js";
import { SessionState } from "./state.js";
import { renderError, renderPrediction, renderWhatIf } from "./render.js";

function makeOption(value: string, selected = false, label?: string): HTMLOptionElement {
  const option = document.createElement("option");
  option.value = value;
  option.textContent = label ?? value;
  option.selected = selected;
  return option;
}

/** Mounts the what-if console. All numbers shown come from the service; the
 * UI never computes probabilities itself. Newer input cancels any request
 * still in flight. */
export class AdvisorApp {
  readonly state = new SessionState();
  private inflight: AbortController | null = null;

  constructor(private root: HTMLElement, private api: AdvisorApi) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <section class="chooser">
        <label>state <select id="model-state"></select></label>
        <label>model <select id="model-kind"></select></label>
        <span id="model-recall"></span>
      </section>
      <form id="feature-form"></form>
      <section class="actions">
        <button id="predict-btn" type="button">predict</button>
        <label>what-if over
          <select id="vary-select"></select>
        </label>
        <button id="whatif-btn" type="button">compare</button>
      </section>
      <div id="error-box"></div>
      <div id="prediction-box"></div>
      <div id="whatif-box"></div>
    `;
    this.state.models = await this.api.listModels();
    const first = this.state.models[0];
    if (first) {
      this.state.selectModel(first.state, first.kind);
    }
    this.renderChooser();
    this.renderForm();
    this.byId("predict-btn").addEventListener("click", () => void this.predict());
    this.byId("whatif-btn").addEventListener("click", () => void this.whatif());
  }

  private byId<T extends HTMLElement = HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private renderChooser(): void {
    const stateSel = this.byId<HTMLSelectElement>("model-state");
    const kindSel = this.byId<HTMLSelectElement>("model-kind");
    const states = [...new Set(this.state.models.map((m) => m.state))];
    stateSel.replaceChildren(...states.map((s) => makeOption(s, s === this.state.selectedState)));
    const kinds = this.state.models
      .filter((m) => m.state === this.state.selectedState)
      .map((m) => m.kind);
    kindSel.replaceChildren(...kinds.map((k) => makeOption(k, k === this.state.selectedKind)));
    const onChange = () => {
      this.cancelInflight();
      this.state.selectModel(stateSel.value, kindSel.value || kinds[0]);
      this.renderChooser();
      this.renderForm();
      this.renderResults();
    };
    stateSel.onchange = onChange;
    kindSel.onchange = onChange;
    const model = this.state.current();
    this.byId("model-recall").textContent =
      model?.cv_recall != null ? `cv recall ${(100 * model.cv_recall).toFixed(1)}%` : "";
  }

  private renderForm(): void {
    const form = this.byId<HTMLFormElement>("feature-form");
    form.replaceChildren();
    const model = this.state.current();
    if (!model) return;
    for (const attr of model.feature_schema) {
      const label = document.createElement("label");
      label.className = "field";
      label.textContent = attr.name + " ";
      let input: HTMLInputElement | HTMLSelectElement;
      if (attr.kind === "nominal") {
        input = document.createElement("select");
        input.append(makeOption("", false, "(unknown)"));
        for (const v of attr.values) {
          input.append(makeOption(v));
        }
      } else {
        input = document.createElement("input");
        input.type = "text";
        input.placeholder = "number";
      }
      input.id = `feature-${attr.name}`;
      input.value = this.state.rawInputs[attr.name] ?? "";
      input.addEventListener("input", () => this.onEdit(attr.name, input.value, attr.kind));
      input.addEventListener("change", () => this.onEdit(attr.name, input.value, attr.kind));
      label.appendChild(input);
      const hint = document.createElement("span");
      hint.className = "field-hint";
      hint.id = `hint-${attr.name}`;
      hint.textContent = this.state.fieldErrors[attr.name] ?? "";
      label.appendChild(hint);
      form.appendChild(label);
    }
    const vary = this.byId<HTMLSelectElement>("vary-select");
    const nominals = model.feature_schema.filter((a) => a.kind === "nominal");
    vary.replaceChildren(...nominals.map((a) => makeOption(a.name)));
  }

  private onEdit(name: string, raw: string, kind: "nominal" | "numeric"): void {
    this.cancelInflight();
    const model = this.state.current();
    if (!model) return;
    this.state.setFeature(name, raw, kind);
    this.renderResults(); // stale results disappear immediately
  }

  private requestBody(): { state: string; kind: string; features: FeatureValues } {
    return {
      state: this.state.selectedState,
      kind: this.state.selectedKind,
      features: { ...this.state.features },
    };
  }

  private cancelInflight(): void {
    if (this.inflight) {
      this.inflight.abort();
      this.inflight = null;
    }
  }

  private begin(): AbortSignal {
    this.cancelInflight();
    this.inflight = new AbortController();
    return this.inflight.signal;
  }

  async predict(): Promise<void> {
    const signal = this.begin();
    try {
      const prediction = await this.api.predict(this.requestBody(), signal);
      if (signal.aborted) return;
      this.state.clearResults();
      this.state.prediction = prediction;
    } catch (err) {
      if (signal.aborted) return;
      this.noteError(err);
    }
    this.renderResults();
  }

  async whatif(): Promise<void> {
    const vary = this.byId<HTMLSelectElement>("vary-select").value;
    if (!vary) return;
    const signal = this.begin();
    try {
      const result = await this.api.whatif({ ...this.requestBody(), vary }, signal);
      if (signal.aborted) return;
      this.state.error = "";
      this.state.whatif = result;
      if (!this.state.prediction) this.state.prediction = result.base;
    } catch (err) {
      if (signal.aborted) return;
      this.noteError(err);
    }
    this.renderResults();
  }

  /** Loading a column into the form counts as an edit, then re-predicts. */
  async pickWhatIfValue(vary: string, value: string): Promise<void> {
    const model = this.state.current();
    if (!model) return;
    this.state.setFeature(vary, value, "nominal");
    this.renderForm();
    this.renderResults();
    await this.predict();
  }

  private noteError(err: unknown): void {
    const model = this.state.current();
    if (err instanceof ServiceError) {
      this.state.noteServiceError(err.detail);
    } else {
      this.state.error = String(err);
    }
    // form inputs are left untouched: the user's entries survive errors
    if (model) {
      for (const attr of model.feature_schema) {
        const hint = this.root.querySelector(`#hint-${attr.name}`);
        if (hint) hint.textContent = this.state.fieldErrors[attr.name] ?? "";
      }
    }
  }

  private renderResults(): void {
    renderError(this.byId("error-box"), this.state.error);
    const predictionBox = this.byId("prediction-box");
    if (this.state.prediction) {
      renderPrediction(predictionBox, this.state.prediction);
    } else {
      predictionBox.replaceChildren();
    }
    const whatifBox = this.byId("whatif-box");
    if (this.state.whatif) {
      const vary = this.state.whatif.vary;
      renderWhatIf(whatifBox, this.state.whatif, {
        onPick: (value) => void this.pickWhatIfValue(vary, value),
      });
    } else {
      whatifBox.replaceChildren();
    }
  }
}

export function createApp(root: HTMLElement, api: AdvisorApi): AdvisorApp {
  return new AdvisorApp(root, api);
}
