/**
 * Minimal SVG scene builder: one x/y axes frame, polylines, markers, arrows.
 * Figures are generated headlessly, so everything is plain string assembly.
 */

export interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

const W = 640;
const H = 480;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };

export class Figure {
  private parts: string[] = [];
  private readonly sx: (x: number) => number;
  private readonly sy: (y: number) => number;

  constructor(
    private readonly extent: Extent,
    private readonly title: string,
    private readonly xLabel: string,
    private readonly yLabel: string,
  ) {
    const padX = 0.05 * (extent.xMax - extent.xMin || 1);
    const padY = 0.05 * (extent.yMax - extent.yMin || 1);
    const x0 = extent.xMin - padX;
    const x1 = extent.xMax + padX;
    const y0 = extent.yMin - padY;
    const y1 = extent.yMax + padY;
    this.sx = (x) =>
      MARGIN.left + ((x - x0) / (x1 - x0)) * (W - MARGIN.left - MARGIN.right);
    this.sy = (y) =>
      H - MARGIN.bottom - ((y - y0) / (y1 - y0)) * (H - MARGIN.top - MARGIN.bottom);
    this.extent = { xMin: x0, xMax: x1, yMin: y0, yMax: y1 };
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1.5): void {
    const pts = xs.map((x, i) => `${this.sx(x).toFixed(2)},${this.sy(ys[i]).toFixed(2)}`);
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="${width}" points="${pts.join(" ")}"/>`,
    );
  }

  circles(xs: number[], ys: number[], stroke: string, r = 4): void {
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(
        `<circle cx="${this.sx(xs[i]).toFixed(2)}" cy="${this.sy(ys[i]).toFixed(2)}" ` +
        `r="${r}" fill="none" stroke="${stroke}"/>`,
      );
    }
  }

  /** Direction arrows: small triangles at fractional positions along the path. */
  arrowsAlong(xs: number[], ys: number[], fill: string, count = 4): void {
    if (xs.length < 3) return;
    for (let k = 0; k < count; k++) {
      const frac = 0.15 + (0.7 * k) / Math.max(count - 1, 1);
      const i = Math.min(Math.floor(frac * (xs.length - 2)), xs.length - 2);
      const x0 = this.sx(xs[i]);
      const y0 = this.sy(ys[i]);
      const x1 = this.sx(xs[i + 1]);
      const y1 = this.sy(ys[i + 1]);
      const dx = x1 - x0;
      const dy = y1 - y0;
      const len = Math.hypot(dx, dy);
      if (len < 1e-9) continue;
      const ux = dx / len;
      const uy = dy / len;
      const size = 7;
      const tipX = x0 + ux * size;
      const tipY = y0 + uy * size;
      const leftX = x0 - uy * (size / 2.2);
      const leftY = y0 + ux * (size / 2.2);
      const rightX = x0 + uy * (size / 2.2);
      const rightY = y0 - ux * (size / 2.2);
      this.parts.push(
        `<polygon class="dir-arrow" fill="${fill}" points="` +
        `${tipX.toFixed(2)},${tipY.toFixed(2)} ${leftX.toFixed(2)},${leftY.toFixed(2)} ` +
        `${rightX.toFixed(2)},${rightY.toFixed(2)}"/>`,
      );
    }
  }

  legend(entries: Array<{ label: string; color: string }>): void {
    entries.forEach((e, i) => {
      const y = MARGIN.top + 14 + 16 * i;
      this.parts.push(
        `<line x1="${W - 150}" y1="${y}" x2="${W - 122}" y2="${y}" stroke="${e.color}" stroke-width="2"/>`,
        `<text x="${W - 116}" y="${y + 4}" font-size="11">${escapeXml(e.label)}</text>`,
      );
    });
  }

  render(caption: string): string {
    const { xMin, xMax, yMin, yMax } = this.extent;
    const axes: string[] = [];
    axes.push(
      `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${W - MARGIN.left - MARGIN.right}" ` +
      `height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#999"/>`,
    );
    for (const frac of [0, 0.25, 0.5, 0.75, 1]) {
      const xv = xMin + frac * (xMax - xMin);
      const yv = yMin + frac * (yMax - yMin);
      const px = this.sx(xv);
      const py = this.sy(yv);
      axes.push(
        `<line x1="${px.toFixed(1)}" y1="${H - MARGIN.bottom}" x2="${px.toFixed(1)}" y2="${H - MARGIN.bottom + 5}" stroke="#333"/>`,
        `<text x="${px.toFixed(1)}" y="${H - MARGIN.bottom + 18}" font-size="10" text-anchor="middle">${fmt(xv)}</text>`,
        `<line x1="${MARGIN.left - 5}" y1="${py.toFixed(1)}" x2="${MARGIN.left}" y2="${py.toFixed(1)}" stroke="#333"/>`,
        `<text x="${MARGIN.left - 8}" y="${(py + 3).toFixed(1)}" font-size="10" text-anchor="end">${fmt(yv)}</text>`,
      );
    }
    if (yMin < 0 && yMax > 0) {
      const py = this.sy(0);
      axes.push(
        `<line x1="${MARGIN.left}" y1="${py.toFixed(1)}" x2="${W - MARGIN.right}" y2="${py.toFixed(1)}" stroke="#ccc" stroke-dasharray="4 3"/>`,
      );
    }
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
      `<rect width="${W}" height="${H}" fill="white"/>`,
      `<title>${escapeXml(this.title)}</title>`,
      `<text x="${W / 2}" y="22" font-size="14" text-anchor="middle">${escapeXml(this.title)}</text>`,
      ...axes,
      ...this.parts,
      `<text x="${W / 2}" y="${H - 14}" font-size="12" text-anchor="middle">${escapeXml(this.xLabel)}</text>`,
      `<text x="16" y="${H / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 ${H / 2})">${escapeXml(this.yLabel)}</text>`,
      `<text class="figure-caption" x="6" y="${H - 2}" font-size="7" fill="#888">${escapeXml(caption)}</text>`,
      `</svg>`,
      "",
    ].join("\n");
  }
}

export function extentOf(xs: number[], ys: number[]): Extent {
  return {
    xMin: Math.min(...xs),
    xMax: Math.max(...xs),
    yMin: Math.min(...ys),
    yMax: Math.max(...ys),
  };
}

function fmt(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a < 1e-3 || a >= 1e4)) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
