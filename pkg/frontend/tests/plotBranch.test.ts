import { mkdtempSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { describe, expect, it } from 'vitest'
import { loadSchema } from '../src/schema.js'
import { renderBranch, readVerdict, Verdict } from '../src/plotBranch.js'
import { Table } from '../src/csv.js'

const BRANCH_HEADER = [
  'step', 'param', 'sup_u', 'sup_v', 'min_u', 'min_v', 'arclength',
]

const branch: Table = {
  header: [...BRANCH_HEADER],
  rows: [0, 1, 2, 3].map((k) => [
    String(k), String(10 + k), String(0.5 * k), String(2 - 0.4 * k),
    '0', '0', String(0.1 * k),
  ]),
}

const verdict: Verdict = {
  termination: 'HitsOtherSemitrivial_u',
  fixed_name: 'lambda',
  fixed_value: 22,
  free_name: 'mu',
  matching_tol: 0.01,
  data: {},
}

describe('schema lockstep', () => {
  it('matches the branch column layout', () => {
    const schema = loadSchema()
    expect(schema.files['branch.csv'].columns).toEqual(BRANCH_HEADER)
    expect(schema.files['verdict.json'].termination_vocabulary).toContain(
      verdict.termination,
    )
  })
})

describe('renderBranch', () => {
  it('annotates the figure with the termination verdict', () => {
    const svg = renderBranch(branch, verdict)
    expect(svg).toContain('<svg')
    expect(svg).toContain('>HitsOtherSemitrivial_u<')
    expect(svg).toContain('sup u')
    expect(svg).toContain('sup v')
  })

  it('rejects a branch file with a missing column', () => {
    const bad: Table = { header: BRANCH_HEADER.slice(0, -1), rows: [] }
    expect(() => renderBranch(bad, verdict)).toThrow(/header mismatch/)
  })
})

describe('readVerdict', () => {
  function writeVerdict(v: object): string {
    const dir = mkdtempSync(join(tmpdir(), 'coexist-plots-'))
    const path = join(dir, 'verdict.json')
    writeFileSync(path, JSON.stringify(v))
    return path
  }

  it('round-trips a valid verdict file', () => {
    const got = readVerdict(writeVerdict(verdict))
    expect(got.termination).toBe('HitsOtherSemitrivial_u')
  })

  it('rejects a termination outside the vocabulary', () => {
    expect(() =>
      readVerdict(writeVerdict({ ...verdict, termination: 'GaveUp' })),
    ).toThrow(/not in schema vocabulary/)
  })

  it('rejects a verdict file with missing fields', () => {
    const { free_name: _dropped, ...partial } = verdict
    expect(() => readVerdict(writeVerdict(partial))).toThrow(/missing field/)
  })
})
