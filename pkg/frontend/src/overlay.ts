// Distortion overlay: the server reports error regions in canvas pixel
// coordinates; the UI draws exactly one red rectangle per region over the
// canvas, plus the global score in the panel header.

import type { DistortionReport } from './types.js';

export interface OverlayRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export function errorBoxRects(report: DistortionReport): OverlayRect[] {
  return report.error_boxes.map(([x0, y0, x1, y1]) => ({
    x: x0,
    y: y0,
    width: Math.max(0, x1 - x0),
    height: Math.max(0, y1 - y0),
  }));
}

export function renderOverlaySvg(
  report: DistortionReport,
  width: number,
  height: number,
): string {
  const rects = errorBoxRects(report)
    .map(
      (r) =>
        `<rect class="error-box" x="${r.x}" y="${r.y}" width="${r.width}" ` +
        `height="${r.height}" fill="none" stroke="#e03131" stroke-width="2"/>`,
    )
    .join('');
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">${rects}</svg>`
  );
}

export function formatScore(report: DistortionReport): string {
  return `${report.metric_kind}: ${(report.global_score * 100).toFixed(1)}%`;
}
