// Panel B: generation options (B1), the gallery (B2), and modification
// buttons (B3). Clicking a gallery row writes its stored options back into
// the form (backtracking); keep/discard toggles persist server-side.

import type { Api } from '../api.js';
import { entryToForm, formToOptions, type OptionsFormState } from '../backtrack.js';
import type { ProjectState } from '../state.js';
import type { GalleryEntry } from '../types.js';

export class GenerationPanel {
  readonly element: HTMLElement;
  onGenerated: (entry: GalleryEntry) => void = () => {};
  onModified: () => void = () => {};
  private state: ProjectState | null = null;
  private pending = false;

  constructor(private readonly api: Api, holder: HTMLElement) {
    this.element = document.createElement('section');
    this.element.className = 'cf-panel';
    this.element.innerHTML = `
      <h2>B &middot; Generation</h2>
      <div class="cf-section" id="cf-b1">
        <input type="text" id="cf-object" placeholder="object, e.g. pile of books" />
        <input type="text" id="cf-desc" placeholder="description, e.g. cozy watercolor" />
        <div class="cf-row">
          <div class="cf-toggle" id="cf-target">
            <button data-value="foreground" class="on">foreground</button>
            <button data-value="background">background</button>
          </div>
          <div class="cf-toggle" id="cf-method">
            <button data-value="unconditional" class="on">unconditional</button>
            <button data-value="conditional">conditional</button>
          </div>
        </div>
        <div class="cf-row">
          <select id="cf-mask-variant">
            <option value="">default mask</option>
            <option value="solid_marks">solid_marks</option>
            <option value="filled_under_curve">filled_under_curve</option>
            <option value="stroke_band">stroke_band</option>
            <option value="sector_fill">sector_fill</option>
            <option value="bubble_fill">bubble_fill</option>
          </select>
          <input type="number" id="cf-seed" value="0" title="seed" />
          <input type="number" id="cf-strength" step="0.05" min="0" max="1" placeholder="strength" title="img2img strength" />
          <button id="cf-generate" disabled>Generate</button>
        </div>
        <div class="cf-error" id="cf-gen-error"></div>
      </div>
      <div class="cf-section">
        <h3>B2 &middot; Gallery</h3>
        <div id="cf-gallery" class="cf-gallery">nothing generated yet</div>
      </div>
      <div class="cf-section cf-row" id="cf-b3">
        <button id="cf-replicate" disabled title="reuse the selected element across all bars">Replicate</button>
        <button id="cf-refine" disabled title="low-strength harmonization pass">Refine</button>
      </div>`;
    holder.appendChild(this.element);
    this.wireToggles('cf-target');
    this.wireToggles('cf-method');
    this.$('cf-generate').addEventListener('click', () => void this.generate());
    this.$('cf-replicate').addEventListener('click', () => void this.replicate());
    this.$('cf-refine').addEventListener('click', () => void this.refine());
  }

  private selectedEntry: GalleryEntry | null = null;

  private $(id: string): HTMLElement {
    return this.element.querySelector(`#${id}`) as HTMLElement;
  }

  private wireToggles(id: string): void {
    const group = this.$(id);
    group.querySelectorAll('button').forEach((button) => {
      button.addEventListener('click', () => {
        group.querySelectorAll('button').forEach((b) => b.classList.remove('on'));
        button.classList.add('on');
      });
    });
  }

  private toggleValue(id: string): string {
    return (this.$(id).querySelector('button.on') as HTMLButtonElement).dataset.value ?? '';
  }

  private setToggle(id: string, value: string): void {
    this.$(id)
      .querySelectorAll('button')
      .forEach((b) => b.classList.toggle('on', b.dataset.value === value));
  }

  setProject(state: ProjectState): void {
    this.state = state;
    this.selectedEntry = null;
    (this.$('cf-generate') as HTMLButtonElement).disabled = false;
    (this.$('cf-refine') as HTMLButtonElement).disabled = false;
    this.renderGallery();
  }

  setObjectTerm(term: string): void {
    const field = this.$('cf-object') as HTMLInputElement;
    field.value = field.value ? `${field.value} ${term}` : term;
  }

  readForm(): OptionsFormState {
    return {
      objectText: (this.$('cf-object') as HTMLInputElement).value,
      descriptionText: (this.$('cf-desc') as HTMLInputElement).value,
      target: this.toggleValue('cf-target') as OptionsFormState['target'],
      method: this.toggleValue('cf-method') as OptionsFormState['method'],
      maskVariant: (this.$('cf-mask-variant') as HTMLSelectElement).value,
      seed: (this.$('cf-seed') as HTMLInputElement).value || '0',
      strength: (this.$('cf-strength') as HTMLInputElement).value,
    };
  }

  writeForm(form: OptionsFormState): void {
    (this.$('cf-object') as HTMLInputElement).value = form.objectText;
    (this.$('cf-desc') as HTMLInputElement).value = form.descriptionText;
    this.setToggle('cf-target', form.target);
    this.setToggle('cf-method', form.method);
    (this.$('cf-mask-variant') as HTMLSelectElement).value = form.maskVariant;
    (this.$('cf-seed') as HTMLInputElement).value = form.seed;
    (this.$('cf-strength') as HTMLInputElement).value = form.strength;
  }

  restoreEntry(entry: GalleryEntry): void {
    this.writeForm(entryToForm(entry));
    this.selectedEntry = entry;
    (this.$('cf-replicate') as HTMLButtonElement).disabled = false;
    this.renderGallery();
  }

  private async generate(): Promise<void> {
    if (!this.state || this.pending) return;
    const errorBox = this.$('cf-gen-error');
    errorBox.textContent = '';
    this.pending = true;
    const button = this.$('cf-generate') as HTMLButtonElement;
    button.textContent = 'Generating…';
    button.disabled = true;
    try {
      const entry = await this.api.generate(this.state.id, formToOptions(this.readForm()));
      this.state.appendEntry(entry);
      await this.state.reload();
      this.renderGallery();
      this.onGenerated(entry);
    } catch (err) {
      errorBox.textContent = String(err instanceof Error ? err.message : err);
    } finally {
      this.pending = false;
      button.textContent = 'Generate';
      button.disabled = false;
    }
  }

  private async replicate(): Promise<void> {
    if (!this.state || !this.selectedEntry) return;
    const errorBox = this.$('cf-gen-error');
    errorBox.textContent = '';
    try {
      await this.api.replicate(this.state.id, { entry_id: this.selectedEntry.id });
      await this.state.reload();
      this.onModified();
    } catch (err) {
      errorBox.textContent = String(err instanceof Error ? err.message : err);
    }
  }

  private async refine(): Promise<void> {
    if (!this.state) return;
    const errorBox = this.$('cf-gen-error');
    errorBox.textContent = '';
    try {
      await this.api.refine(this.state.id, { strength: 0.3, seed: 0 });
      await this.state.reload();
      this.onModified();
    } catch (err) {
      errorBox.textContent = String(err instanceof Error ? err.message : err);
    }
  }

  renderGallery(): void {
    const gallery = this.$('cf-gallery');
    if (!this.state || this.state.gallery.length === 0) {
      gallery.textContent = 'nothing generated yet';
      return;
    }
    gallery.innerHTML = '';
    for (const entry of this.state.gallery) {
      const row = document.createElement('div');
      row.className = 'cf-gallery-row';
      if (!entry.kept) row.classList.add('discarded');
      if (this.selectedEntry?.id === entry.id) row.classList.add('selected');
      const img = document.createElement('img');
      img.src = this.api.assetUrl(entry.result_asset);
      img.alt = entry.options.prompt_object;
      const label = document.createElement('div');
      label.className = 'cf-gallery-label';
      label.textContent = `${entry.options.prompt_object} · ${entry.target}/${entry.method} · seed ${entry.options.seed}`;
      const keep = document.createElement('button');
      keep.textContent = entry.kept ? 'discard' : 'restore';
      keep.addEventListener('click', async (ev) => {
        ev.stopPropagation();
        const updated = await this.api.patchGallery(this.state!.id, entry.id, !entry.kept);
        entry.kept = updated.kept;
        this.renderGallery();
      });
      row.append(img, label, keep);
      row.addEventListener('click', () => this.restoreEntry(entry));
      gallery.appendChild(row);
    }
  }
}
