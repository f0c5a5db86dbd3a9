/**
 * Coexistence-region figure: one colored cell per (lambda, mu) verdict
 * with the two invasion curves overlaid and a legend restricted to the
 * verdicts actually present.
 */

import { readCsv, column, numericColumn, Table } from './csv.js'
import { loadSchema, checkHeader } from './schema.js'
import {
  Svg,
  DEFAULT_MARGINS,
  linearScale,
  drawAxes,
} from './svg.js'

export const VERDICT_COLORS: Record<string, string> = {
  ProvenEmpty: '#cccccc',
  Predicted: '#ffd27f',
  Confirmed: '#2e8b57',
  PredictedNotFound: '#d9534f',
  Unknown: '#f4f4f4',
}

const CURVE_COLORS: Record<string, string> = {
  mu_lambda: '#1f77b4',
  lambda_mu: '#9467bd',
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b)
}

export function renderRegion(regionTable: Table, curvesTable: Table): string {
  const schema = loadSchema()
  checkHeader(schema, 'region.csv', regionTable.header)
  checkHeader(schema, 'curves.csv', curvesTable.header)
  const vocabulary = schema.files['region.csv'].verdict_vocabulary ?? []

  const lams = numericColumn(regionTable, 'lambda')
  const mus = numericColumn(regionTable, 'mu')
  const verdicts = column(regionTable, 'verdict')
  for (const v of verdicts) {
    if (!vocabulary.includes(v)) {
      throw new Error(`verdict ${v} not in schema vocabulary`)
    }
  }

  const lamGrid = uniqueSorted(lams)
  const muGrid = uniqueSorted(mus)
  const width = 720
  const height = 520
  const m = DEFAULT_MARGINS
  const svg = new Svg(width, height)

  const dLam = lamGrid.length > 1 ? lamGrid[1] - lamGrid[0] : 1
  const dMu = muGrid.length > 1 ? muGrid[1] - muGrid[0] : 1
  const xScale = linearScale(
    [lamGrid[0] - dLam / 2, lamGrid[lamGrid.length - 1] + dLam / 2],
    [m.left, width - m.right],
  )
  const yScale = linearScale(
    [muGrid[0] - dMu / 2, muGrid[muGrid.length - 1] + dMu / 2],
    [height - m.bottom, m.top],
  )

  for (let k = 0; k < verdicts.length; k++) {
    const x = xScale(lams[k] - dLam / 2)
    const y = yScale(mus[k] + dMu / 2)
    const w = xScale(lams[k] + dLam / 2) - x
    const h = yScale(mus[k] - dMu / 2) - y
    svg.rect(x, y, w, h, VERDICT_COLORS[verdicts[k]], '#ffffff')
  }

  // overlay: mu_lambda is a function of lambda, lambda_mu of mu
  const which = column(curvesTable, 'which')
  const params = numericColumn(curvesTable, 'param')
  const values = numericColumn(curvesTable, 'value')
  for (const name of ['mu_lambda', 'lambda_mu'] as const) {
    const pts: Array<[number, number]> = []
    for (let k = 0; k < which.length; k++) {
      if (which[k] !== name) continue
      const [lam, mu] =
        name === 'mu_lambda' ? [params[k], values[k]] : [values[k], params[k]]
      if (
        lam >= xScale.domain[0] && lam <= xScale.domain[1] &&
        mu >= yScale.domain[0] && mu <= yScale.domain[1]
      ) {
        pts.push([xScale(lam), yScale(mu)])
      }
    }
    svg.path(pts, CURVE_COLORS[name])
  }

  drawAxes(svg, xScale, yScale, m, 'lambda', 'mu')
  svg.text(m.left, 24, 'Coexistence region', { size: 15 })

  // legend: only verdicts present, plus the overlaid curves
  const present = vocabulary.filter((v) => verdicts.includes(v))
  const lx = width - m.right + 16
  let ly = m.top + 4
  for (const v of present) {
    svg.rect(lx, ly, 14, 14, VERDICT_COLORS[v], '#888888')
    svg.text(lx + 20, ly + 12, v, { size: 11 })
    ly += 22
  }
  ly += 8
  for (const name of ['mu_lambda', 'lambda_mu']) {
    if (which.includes(name)) {
      svg.line(lx, ly + 7, lx + 14, ly + 7, CURVE_COLORS[name])
      svg.text(lx + 20, ly + 12, name, { size: 11 })
      ly += 22
    }
  }

  return svg.render()
}

export function renderRegionFromFiles(
  regionPath: string,
  curvesPath: string,
): string {
  return renderRegion(readCsv(regionPath), readCsv(curvesPath))
}
