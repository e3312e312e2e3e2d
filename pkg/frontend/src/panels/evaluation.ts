// Panel C: distortion evaluation with error overlay (C1), simple element
// tools (C2), and the layer list with reorder/visibility (C3). All layer
// edits round-trip through PUT /layers so a reload shows the same state.

import type { Api } from '../api.js';
import { formatScore, renderOverlaySvg } from '../overlay.js';
import type { ProjectState } from '../state.js';

export class EvaluationPanel {
  readonly element: HTMLElement;
  onLayersChanged: () => void = () => {};
  onOverlay: (svg: string) => void = () => {};
  private state: ProjectState | null = null;
  private selectedLayer: string | null = null;

  constructor(private readonly api: Api, holder: HTMLElement) {
    this.element = document.createElement('section');
    this.element.className = 'cf-panel';
    this.element.innerHTML = `
      <h2>C &middot; Evaluation &amp; layers</h2>
      <div class="cf-section" id="cf-c1">
        <div class="cf-row">
          <select id="cf-eval-target">
            <option value="preview">plain preview</option>
            <option value="composite">composite</option>
          </select>
          <button id="cf-evaluate" disabled>Evaluate</button>
          <button id="cf-clear-overlay">Clear</button>
        </div>
        <div id="cf-score" class="cf-score"></div>
        <div class="cf-error" id="cf-eval-error"></div>
      </div>
      <div class="cf-section" id="cf-c2">
        <h3>C2 &middot; Element tools</h3>
        <div class="cf-row">
          <label>scale <input type="number" id="cf-tool-scale" step="0.05" value="1"/></label>
          <label>rotate&deg; <input type="number" id="cf-tool-rotate" step="5" value="0"/></label>
        </div>
        <div class="cf-row">
          <label>dx <input type="number" id="cf-tool-tx" step="4" value="0"/></label>
          <label>dy <input type="number" id="cf-tool-ty" step="4" value="0"/></label>
          <button id="cf-tool-apply" disabled>Apply to layer</button>
        </div>
      </div>
      <div class="cf-section" id="cf-c3">
        <h3>C3 &middot; Layers</h3>
        <div id="cf-layers" class="cf-layers">no project</div>
      </div>`;
    holder.appendChild(this.element);
    this.$('cf-evaluate').addEventListener('click', () => void this.evaluate());
    this.$('cf-clear-overlay').addEventListener('click', () => {
      this.onOverlay('');
      this.$('cf-score').textContent = '';
    });
    this.$('cf-tool-apply').addEventListener('click', () => void this.applyTransform());
  }

  private $(id: string): HTMLElement {
    return this.element.querySelector(`#${id}`) as HTMLElement;
  }

  setProject(state: ProjectState): void {
    this.state = state;
    this.selectedLayer = null;
    (this.$('cf-evaluate') as HTMLButtonElement).disabled = false;
    this.renderLayers();
    this.populateEvalTargets();
  }

  private populateEvalTargets(): void {
    const select = this.$('cf-eval-target') as HTMLSelectElement;
    select.innerHTML = `
      <option value="preview">plain preview</option>
      <option value="composite">composite</option>`;
    if (!this.state) return;
    for (const layer of this.state.layers) {
      if (layer.kind === 'annotation') continue;
      const option = document.createElement('option');
      option.value = layer.id;
      option.textContent = `layer ${layer.kind} ${layer.id.slice(0, 6)}`;
      select.appendChild(option);
    }
  }

  private async evaluate(): Promise<void> {
    if (!this.state) return;
    const errorBox = this.$('cf-eval-error');
    errorBox.textContent = '';
    try {
      const target = (this.$('cf-eval-target') as HTMLSelectElement).value;
      const report = await this.api.evaluate(this.state.id, { target });
      this.$('cf-score').textContent =
        `${formatScore(report)} — ${report.error_boxes.length} error region(s)`;
      const [w, h] = this.state.project.spec.canvas_size;
      this.onOverlay(renderOverlaySvg(report, w, h));
    } catch (err) {
      errorBox.textContent = String(err instanceof Error ? err.message : err);
    }
  }

  private async applyTransform(): Promise<void> {
    if (!this.state || !this.selectedLayer) return;
    const deg = Number((this.$('cf-tool-rotate') as HTMLInputElement).value) || 0;
    this.state.setLayerTransform(this.selectedLayer, {
      scale: Number((this.$('cf-tool-scale') as HTMLInputElement).value) || 1,
      rotate: (deg * Math.PI) / 180,
      tx: Number((this.$('cf-tool-tx') as HTMLInputElement).value) || 0,
      ty: Number((this.$('cf-tool-ty') as HTMLInputElement).value) || 0,
    });
    await this.state.commitLayers();
    this.renderLayers();
    this.onLayersChanged();
  }

  selectLayer(layerId: string | null): void {
    this.selectedLayer = layerId;
    (this.$('cf-tool-apply') as HTMLButtonElement).disabled = layerId === null;
    this.renderLayers();
  }

  renderLayers(): void {
    const list = this.$('cf-layers');
    if (!this.state) {
      list.textContent = 'no project';
      return;
    }
    list.innerHTML = '';
    const layers = this.state.layers;
    layers.forEach((layer, index) => {
      const row = document.createElement('div');
      row.className = 'cf-layer-row';
      if (layer.id === this.selectedLayer) row.classList.add('selected');

      const visible = document.createElement('input');
      visible.type = 'checkbox';
      visible.checked = layer.visible;
      visible.title = 'visible';
      visible.addEventListener('change', async () => {
        this.state!.setLayerVisible(layer.id, visible.checked);
        await this.state!.commitLayers();
        this.onLayersChanged();
      });

      const label = document.createElement('span');
      label.textContent = `${index}: ${layer.kind}`;
      label.addEventListener('click', () => this.selectLayer(layer.id));

      const up = document.createElement('button');
      up.textContent = '↑';
      up.disabled = index === 0;
      up.addEventListener('click', async () => {
        this.state!.moveLayer(layer.id, -1);
        await this.state!.commitLayers();
        this.renderLayers();
        this.onLayersChanged();
      });
      const down = document.createElement('button');
      down.textContent = '↓';
      down.disabled = index === layers.length - 1;
      down.addEventListener('click', async () => {
        this.state!.moveLayer(layer.id, +1);
        await this.state!.commitLayers();
        this.renderLayers();
        this.onLayersChanged();
      });

      row.append(visible, label, up, down);
      list.appendChild(row);
    });
  }
}
