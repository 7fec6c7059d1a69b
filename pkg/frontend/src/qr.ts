// Client-side QR rendering. The server sends only the code text; the
// browser turns each into a scannable image. SVG output keeps this
// testable in a DOM without canvas support.

import qrcode from "qrcode-generator";

/** Boolean module matrix (true = dark) for the given text. */
export function qrModules(text: string): boolean[][] {
  const qr = qrcode(0, "M");
  qr.addData(text);
  qr.make();
  const count = qr.getModuleCount();
  const rows: boolean[][] = [];
  for (let r = 0; r < count; r++) {
    const row: boolean[] = [];
    for (let c = 0; c < count; c++) {
      row.push(qr.isDark(r, c));
    }
    rows.push(row);
  }
  return rows;
}

/** Standalone SVG tag encoding exactly `text` (4-module quiet zone). */
export function qrSvg(text: string, cellSize = 4): string {
  const qr = qrcode(0, "M");
  qr.addData(text);
  qr.make();
  return qr.createSvgTag({ cellSize, margin: cellSize * 4, scalable: true });
}

/**
 * Rasterize a module matrix to RGBA pixels (for decoding in tests).
 * `scale` pixels per module plus a `quiet`-module white border.
 */
export function rasterize(
  modules: boolean[][],
  scale = 8,
  quiet = 4,
): { data: Uint8ClampedArray; width: number; height: number } {
  const count = modules.length;
  const size = (count + 2 * quiet) * scale;
  const data = new Uint8ClampedArray(size * size * 4).fill(255);
  for (let r = 0; r < count; r++) {
    for (let c = 0; c < count; c++) {
      if (!modules[r][c]) continue;
      for (let dy = 0; dy < scale; dy++) {
        for (let dx = 0; dx < scale; dx++) {
          const y = (r + quiet) * scale + dy;
          const x = (c + quiet) * scale + dx;
          const at = (y * size + x) * 4;
          data[at] = data[at + 1] = data[at + 2] = 0;
        }
      }
    }
  }
  return { data, width: size, height: size };
}
