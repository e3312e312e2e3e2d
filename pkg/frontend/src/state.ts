// Client-side project mirror. Layer edits mutate the local copy, then
// commitLayers pushes the whole stack and adopts the server's response as
// the new truth, so the mirror never drifts from persisted state.

import type { Api } from './api.js';
import type { GalleryEntry, LayerInfo, Project } from './types.js';

export class ProjectState {
  constructor(
    private readonly api: Api,
    public project: Project,
  ) {}

  static async load(api: Api, id: string): Promise<ProjectState> {
    return new ProjectState(api, await api.getProject(id));
  }

  get id(): string {
    return this.project.id;
  }

  get layers(): LayerInfo[] {
    return this.project.layers;
  }

  get gallery(): GalleryEntry[] {
    return this.project.gallery;
  }

  layer(layerId: string): LayerInfo | undefined {
    return this.project.layers.find((l) => l.id === layerId);
  }

  moveLayer(layerId: string, delta: number): boolean {
    const layers = this.project.layers;
    const from = layers.findIndex((l) => l.id === layerId);
    const to = from + delta;
    if (from < 0 || to < 0 || to >= layers.length) return false;
    const [layer] = layers.splice(from, 1);
    layers.splice(to, 0, layer);
    return true;
  }

  setLayerVisible(layerId: string, visible: boolean): boolean {
    const layer = this.layer(layerId);
    if (!layer) return false;
    layer.visible = visible;
    return true;
  }

  setLayerTransform(layerId: string, patch: Partial<LayerInfo['transform']>): boolean {
    const layer = this.layer(layerId);
    if (!layer) return false;
    layer.transform = { ...layer.transform, ...patch };
    return true;
  }

  async commitLayers(): Promise<void> {
    this.project = await this.api.putLayers(this.id, this.project.layers);
  }

  async reload(): Promise<void> {
    this.project = await this.api.getProject(this.id);
  }

  appendEntry(entry: GalleryEntry): void {
    this.project.gallery.push(entry);
  }
}
