/**
 * Loader for the shared output schema. The Python package owns
 * output_schema.json; this package reads the same file so the CSV
 * column layout and verdict vocabulary have a single source of truth.
 */

import { readFileSync, existsSync } from 'fs'
import { dirname, join } from 'path'
import { fileURLToPath } from 'url'

export interface FileSchema {
  columns?: string[]
  fields?: string[]
  verdict_vocabulary?: string[]
  which_vocabulary?: string[]
  termination_vocabulary?: string[]
}

export interface OutputSchema {
  version: number
  float_format: string
  files: Record<string, FileSchema>
}

const here = dirname(fileURLToPath(import.meta.url))

const CANDIDATES = [
  process.env.COEXIST_SCHEMA,
  // repo layout: frontend/{src,dist}/schema.* next to src/coexist/
  join(here, '..', '..', 'src', 'coexist', 'output_schema.json'),
  join(here, '..', '..', '..', 'src', 'coexist', 'output_schema.json'),
].filter((p): p is string => Boolean(p))

export function loadSchema(): OutputSchema {
  for (const candidate of CANDIDATES) {
    if (existsSync(candidate)) {
      return JSON.parse(readFileSync(candidate, 'utf8')) as OutputSchema
    }
  }
  throw new Error(
    `output_schema.json not found; looked at ${CANDIDATES.join(', ')} ` +
    '(set COEXIST_SCHEMA to override)',
  )
}

/** Verify a CSV header against the schema entry for the given file. */
export function checkHeader(
  schema: OutputSchema,
  file: string,
  header: string[],
): void {
  const expected = schema.files[file]?.columns
  if (!expected) {
    throw new Error(`no schema entry for ${file}`)
  }
  if (
    header.length !== expected.length ||
    expected.some((name, i) => header[i] !== name)
  ) {
    throw new Error(
      `${file} header mismatch: got [${header.join(', ')}], ` +
      `expected [${expected.join(', ')}]`,
    )
  }
}
