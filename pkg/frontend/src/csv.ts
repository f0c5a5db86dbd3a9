/** Thin wrapper over papaparse for the toolkit's RFC-4180 files. */

import { readFileSync } from 'fs'
import Papa from 'papaparse'

export interface Table {
  header: string[]
  rows: string[][]
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, 'utf8')
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true })
  if (parsed.errors.length > 0) {
    throw new Error(`failed to parse ${path}: ${parsed.errors[0].message}`)
  }
  const data = parsed.data
  if (data.length === 0) {
    throw new Error(`${path} is empty`)
  }
  return { header: data[0], rows: data.slice(1) }
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name)
  if (idx < 0) {
    throw new Error(`missing column ${name}`)
  }
  return table.rows.map((r) => r[idx])
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map(Number)
}
