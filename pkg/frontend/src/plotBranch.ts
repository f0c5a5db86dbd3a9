/**
 * Bifurcation-diagram figure: sup norms of both components along the
 * continuation branch against the free parameter, annotated with the
 * termination verdict.
 */

import { readFileSync } from 'fs'
import { readCsv, numericColumn, Table } from './csv.js'
import { loadSchema, checkHeader } from './schema.js'
import {
  Svg,
  DEFAULT_MARGINS,
  linearScale,
  drawAxes,
} from './svg.js'

export interface Verdict {
  termination: string
  fixed_name: string
  fixed_value: number
  free_name: string
  matching_tol: number
  data: Record<string, unknown>
}

export function readVerdict(path: string): Verdict {
  const schema = loadSchema()
  const verdict = JSON.parse(readFileSync(path, 'utf8')) as Verdict
  const spec = schema.files['verdict.json']
  for (const field of spec.fields ?? []) {
    if (!(field in verdict)) {
      throw new Error(`verdict.json missing field ${field}`)
    }
  }
  const vocab = spec.termination_vocabulary ?? []
  if (!vocab.includes(verdict.termination)) {
    throw new Error(
      `termination ${verdict.termination} not in schema vocabulary`,
    )
  }
  return verdict
}

export function renderBranch(table: Table, verdict: Verdict): string {
  const schema = loadSchema()
  checkHeader(schema, 'branch.csv', table.header)

  const params = numericColumn(table, 'param')
  const supU = numericColumn(table, 'sup_u')
  const supV = numericColumn(table, 'sup_v')

  const width = 720
  const height = 520
  const m = DEFAULT_MARGINS
  const svg = new Svg(width, height)

  const pLo = Math.min(...params)
  const pHi = Math.max(...params)
  const sHi = Math.max(...supU, ...supV, 1e-12)
  const xScale = linearScale(
    [pLo, pHi === pLo ? pLo + 1 : pHi],
    [m.left, width - m.right],
  )
  const yScale = linearScale([0, 1.05 * sHi], [height - m.bottom, m.top])

  const series: Array<[string, number[], string]> = [
    ['sup u', supU, '#d62728'],
    ['sup v', supV, '#1f77b4'],
  ]
  for (const [, values, color] of series) {
    svg.path(
      params.map((p, i) => [xScale(p), yScale(values[i])]),
      color,
    )
  }

  drawAxes(svg, xScale, yScale, m, verdict.free_name, 'sup norm')
  svg.text(
    m.left,
    24,
    `Branch at ${verdict.fixed_name} = ${verdict.fixed_value}`,
    { size: 15 },
  )
  svg.text(m.left, height - 2, verdict.termination, { size: 12 })

  const lx = width - m.right + 16
  let ly = m.top + 4
  for (const [label, , color] of series) {
    svg.line(lx, ly + 7, lx + 14, ly + 7, color)
    svg.text(lx + 20, ly + 12, label, { size: 11 })
    ly += 22
  }

  return svg.render()
}

export function renderBranchFromFiles(
  branchPath: string,
  verdictPath: string,
): string {
  return renderBranch(readCsv(branchPath), readVerdict(verdictPath))
}
