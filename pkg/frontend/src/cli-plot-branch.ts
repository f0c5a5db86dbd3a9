#!/usr/bin/env node
/** plot-branch <branch.csv> <verdict.json> -o <figure.svg> */

import { writeFileSync } from 'fs'
import { renderBranchFromFiles } from './plotBranch.js'

function main(argv: string[]): number {
  const args = argv.slice(2)
  const oIdx = args.indexOf('-o')
  if (oIdx < 0 || args.length !== 4) {
    console.error('usage: plot-branch <branch.csv> <verdict.json> -o <figure.svg>')
    return 2
  }
  const out = args[oIdx + 1]
  const [branchPath, verdictPath] = args.filter(
    (_, i) => i !== oIdx && i !== oIdx + 1,
  )
  try {
    writeFileSync(out, renderBranchFromFiles(branchPath, verdictPath))
  } catch (err) {
    console.error(`plot-branch: ${err instanceof Error ? err.message : err}`)
    return 1
  }
  return 0
}

process.exit(main(process.argv))
