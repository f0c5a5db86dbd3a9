#!/usr/bin/env node
/** plot-region <region.csv> <curves.csv> -o <figure.svg> */

import { writeFileSync } from 'fs'
import { renderRegionFromFiles } from './plotRegion.js'

function main(argv: string[]): number {
  const args = argv.slice(2)
  const oIdx = args.indexOf('-o')
  if (oIdx < 0 || args.length !== 4) {
    console.error('usage: plot-region <region.csv> <curves.csv> -o <figure.svg>')
    return 2
  }
  const out = args[oIdx + 1]
  const [regionPath, curvesPath] = args.filter(
    (_, i) => i !== oIdx && i !== oIdx + 1,
  )
  try {
    writeFileSync(out, renderRegionFromFiles(regionPath, curvesPath))
  } catch (err) {
    console.error(`plot-region: ${err instanceof Error ? err.message : err}`)
    return 1
  }
  return 0
}

process.exit(main(process.argv))
