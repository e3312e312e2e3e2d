// Central canvas: client-side compositing of the layer stack for display.
// All scores and masks come from the server; this only draws.

import type { Api } from './api.js';
import type { LayerInfo, Project } from './types.js';

export class CanvasView {
  readonly element: HTMLCanvasElement;
  private readonly images = new Map<string, HTMLImageElement>();
  private overlaySvg = '';
  selected: string | null = null;
  onSelect: (layerId: string | null) => void = () => {};

  constructor(private readonly api: Api, holder: HTMLElement) {
    this.element = document.createElement('canvas');
    this.element.className = 'cf-canvas';
    holder.appendChild(this.element);
    this.overlayHolder = document.createElement('div');
    this.overlayHolder.className = 'cf-overlay';
    holder.appendChild(this.overlayHolder);
    this.element.addEventListener('click', () => {
      this.onSelect(this.selected);
    });
  }

  private overlayHolder: HTMLDivElement;

  setOverlay(svg: string): void {
    this.overlaySvg = svg;
    this.overlayHolder.innerHTML = svg;
  }

  clearOverlay(): void {
    this.setOverlay('');
  }

  private loadImage(assetId: string): Promise<HTMLImageElement> {
    const cached = this.images.get(assetId);
    if (cached) return Promise.resolve(cached);
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => {
        this.images.set(assetId, img);
        resolve(img);
      };
      img.onerror = () => reject(new Error(`failed to load asset ${assetId}`));
      img.src = this.api.assetUrl(assetId);
    });
  }

  async render(project: Project): Promise<void> {
    const [width, height] = project.spec.canvas_size;
    this.element.width = width;
    this.element.height = height;
    const ctx = this.element.getContext('2d');
    if (!ctx) return;
    ctx.fillStyle = '#ffffff';
    ctx.fillRect(0, 0, width, height);
    for (const layer of project.layers) {
      if (!layer.visible) continue;
      let image: HTMLImageElement;
      try {
        image = await this.loadImage(layer.asset);
      } catch {
        continue;
      }
      this.drawLayer(ctx, layer, image, width, height);
    }
    if (this.overlaySvg) this.overlayHolder.innerHTML = this.overlaySvg;
  }

  private drawLayer(
    ctx: CanvasRenderingContext2D,
    layer: LayerInfo,
    image: HTMLImageElement,
    width: number,
    height: number,
  ): void {
    const t = layer.transform;
    const cx = image.width / 2 + t.tx;
    const cy = image.height / 2 + t.ty;
    ctx.save();
    ctx.translate(cx, cy);
    ctx.rotate(t.rotate);
    ctx.scale(t.scale, t.scale);
    ctx.drawImage(image, -image.width / 2, -image.height / 2);
    ctx.restore();
    if (layer.id === this.selected) {
      ctx.save();
      ctx.strokeStyle = '#4263eb';
      ctx.setLineDash([6, 4]);
      ctx.strokeRect(1, 1, width - 2, height - 2);
      ctx.restore();
    }
  }
}
