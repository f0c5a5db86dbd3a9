/** Minimal SVG document builder: enough for axes, rectangles, paths
 * and text, with no rendering dependencies. */

export interface Margins {
  top: number
  right: number
  bottom: number
  left: number
}

export const DEFAULT_MARGINS: Margins = {
  top: 40,
  right: 160,
  bottom: 50,
  left: 65,
}

const esc = (s: string) =>
  s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')

export class Svg {
  private parts: string[] = []

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(
    x: number,
    y: number,
    w: number,
    h: number,
    fill: string,
    stroke = 'none',
  ): void {
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" ` +
      `width="${w.toFixed(2)}" height="${h.toFixed(2)}" ` +
      `fill="${fill}" stroke="${stroke}"/>`,
    )
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string): void {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" ` +
      `x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" ` +
      `stroke="${stroke}" stroke-width="1"/>`,
    )
  }

  path(points: Array<[number, number]>, stroke: string, width = 2): void {
    if (points.length === 0) return
    const d = points
      .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${x.toFixed(2)},${y.toFixed(2)}`)
      .join(' ')
    this.parts.push(
      `<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    )
  }

  text(
    x: number,
    y: number,
    content: string,
    opts: { anchor?: string; size?: number; rotate?: boolean } = {},
  ): void {
    const anchor = opts.anchor ?? 'start'
    const size = opts.size ?? 12
    const transform = opts.rotate
      ? ` transform="rotate(-90 ${x.toFixed(2)} ${y.toFixed(2)})"`
      : ''
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" ` +
      `font-family="sans-serif" font-size="${size}" ` +
      `text-anchor="${anchor}"${transform}>${esc(content)}</text>`,
    )
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" ` +
      `width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join('\n') +
      '\n</svg>\n'
    )
  }
}

export interface Scale {
  (value: number): number
  domain: [number, number]
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain
  const [r0, r1] = range
  const span = d1 - d0 || 1
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale
  fn.domain = domain
  return fn
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1
  const step = Math.pow(10, Math.floor(Math.log10(span / count)))
  const err = span / count / step
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1
  const s = mult * step
  const ticks: number[] = []
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12; v += s) {
    ticks.push(Math.abs(v) < 1e-12 ? 0 : v)
  }
  return ticks
}

export function drawAxes(
  svg: Svg,
  xScale: Scale,
  yScale: Scale,
  margins: Margins,
  xLabel: string,
  yLabel: string,
): void {
  const x0 = margins.left
  const x1 = svg.width - margins.right
  const y0 = svg.height - margins.bottom
  const y1 = margins.top
  svg.line(x0, y0, x1, y0, 'black')
  svg.line(x0, y0, x0, y1, 'black')
  for (const t of niceTicks(xScale.domain[0], xScale.domain[1])) {
    const px = xScale(t)
    svg.line(px, y0, px, y0 + 5, 'black')
    svg.text(px, y0 + 18, formatTick(t), { anchor: 'middle', size: 11 })
  }
  for (const t of niceTicks(yScale.domain[0], yScale.domain[1])) {
    const py = yScale(t)
    svg.line(x0 - 5, py, x0, py, 'black')
    svg.text(x0 - 8, py + 4, formatTick(t), { anchor: 'end', size: 11 })
  }
  svg.text((x0 + x1) / 2, svg.height - 12, xLabel, { anchor: 'middle' })
  svg.text(18, (y0 + y1) / 2, yLabel, { anchor: 'middle', rotate: true })
}

function formatTick(v: number): string {
  if (v === 0) return '0'
  const abs = Math.abs(v)
  if (abs >= 1000 || abs < 0.01) return v.toExponential(1)
  return String(Math.round(v * 100) / 100)
}
