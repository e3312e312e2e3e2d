// Panel A: data upload and chart settings (A1), raw-data preview (A2),
// semantic context chips (A3). Clicking a term chip inserts it into the
// generation object field.

import type { Api, CreateProjectBody } from '../api.js';
import type { Project, SemanticsInfo } from '../types.js';

export class SettingsPanel {
  readonly element: HTMLElement;
  onProjectCreated: (project: Project) => void = () => {};
  onTermPicked: (term: string) => void = () => {};

  private fileText: string | null = null;
  private fileFormat: 'csv' | 'json' = 'csv';

  constructor(private readonly api: Api, holder: HTMLElement) {
    this.element = document.createElement('section');
    this.element.className = 'cf-panel';
    this.element.innerHTML = `
      <h2>A &middot; Data &amp; semantics</h2>
      <div class="cf-section" id="cf-a1">
        <label class="cf-file">
          <input type="file" id="cf-data-file" accept=".csv,.json" />
          <span id="cf-file-name">Choose CSV or JSON&hellip;</span>
        </label>
        <input type="text" id="cf-title" placeholder="Chart title (optional)" />
        <div class="cf-row">
          <select id="cf-chart-type">
            <option value="bar">bar</option>
            <option value="line">line</option>
            <option value="pie">pie</option>
            <option value="scatter">scatter</option>
          </select>
          <select id="cf-aspect">
            <option value="1,1">1 : 1</option>
            <option value="4,3">4 : 3</option>
            <option value="2,1">2 : 1</option>
            <option value="3,1">3 : 1</option>
          </select>
          <button id="cf-create" disabled>Create preview</button>
        </div>
        <div class="cf-error" id="cf-create-error"></div>
      </div>
      <div class="cf-section">
        <h3>A2 &middot; Raw data</h3>
        <div id="cf-data-preview" class="cf-data-preview">no data yet</div>
      </div>
      <div class="cf-section">
        <h3>A3 &middot; Semantic context</h3>
        <div id="cf-chips" class="cf-chips">upload a titled dataset to see related terms</div>
      </div>`;
    holder.appendChild(this.element);
    this.wire();
  }

  private $(id: string): HTMLElement {
    return this.element.querySelector(`#${id}`) as HTMLElement;
  }

  private created = false;

  private wire(): void {
    const fileInput = this.$('cf-data-file') as HTMLInputElement;
    fileInput.addEventListener('change', async () => {
      const file = fileInput.files?.[0];
      if (!file) return;
      this.fileText = await file.text();
      this.fileFormat = file.name.toLowerCase().endsWith('.json') ? 'json' : 'csv';
      this.$('cf-file-name').textContent = file.name;
      (this.$('cf-create') as HTMLButtonElement).disabled = false;
      this.$('cf-data-preview').textContent = this.fileText.split('\n').slice(0, 8).join('\n');
    });
    this.$('cf-create').addEventListener('click', () => void this.create());
    // Changing chart type or aspect refreshes the preview once data exists.
    for (const id of ['cf-chart-type', 'cf-aspect']) {
      this.$(id).addEventListener('change', () => {
        if (this.created) void this.create();
      });
    }
  }

  private async create(): Promise<void> {
    if (this.fileText === null) return;
    const errorBox = this.$('cf-create-error');
    errorBox.textContent = '';
    const aspect = (this.$('cf-aspect') as HTMLSelectElement).value
      .split(',')
      .map(Number) as [number, number];
    const body: CreateProjectBody = {
      data: this.fileText,
      format: this.fileFormat,
      title: (this.$('cf-title') as HTMLInputElement).value || null,
      spec: {
        chart_type: (this.$('cf-chart-type') as HTMLSelectElement).value,
        aspect_ratio: aspect,
      },
    };
    try {
      const project = await this.api.createProject(body);
      this.created = true;
      this.onProjectCreated(project);
      await this.showSemantics(project.id);
    } catch (err) {
      errorBox.textContent = String(err instanceof Error ? err.message : err);
    }
  }

  async showSemantics(projectId: string): Promise<void> {
    const chips = this.$('cf-chips');
    let semantics: SemanticsInfo;
    try {
      semantics = await this.api.getSemantics(projectId);
    } catch {
      chips.textContent = 'semantics unavailable';
      return;
    }
    chips.innerHTML = '';
    if (!semantics.keywords.length) {
      chips.textContent = 'no title, no keywords';
      return;
    }
    for (const keyword of semantics.keywords) {
      chips.appendChild(this.chip(keyword.term, 'cf-chip-keyword'));
      for (const related of semantics.related[keyword.term] ?? []) {
        chips.appendChild(this.chip(related.term, 'cf-chip-related'));
      }
    }
  }

  private chip(term: string, cls: string): HTMLButtonElement {
    const chip = document.createElement('button');
    chip.className = `cf-chip ${cls}`;
    chip.textContent = term;
    chip.addEventListener('click', () => this.onTermPicked(term));
    return chip;
  }
}
