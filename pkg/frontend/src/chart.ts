/**
 * Metrics chart fed straight from /api/metrics.csv: the plotted values are the
 * CSV's own fields, never recomputed client-side.
 */

export interface SeriesPoint {
  state: string;
  /** literal CSV field, kept verbatim for display and comparison */
  raw: string;
  value: number;
}

export interface ChartData {
  accuracy: SeriesPoint[];
  transformation: SeriesPoint[];
}

export function parseMetricsCsv(csv: string): ChartData {
  const lines = csv.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) return { accuracy: [], transformation: [] };
  const header = lines[0].split(",");
  const stateCol = header.indexOf("state");
  const accCol = header.indexOf("accuracy");
  const rateCol = header.indexOf("transformation_rate");
  if (stateCol < 0 || accCol < 0 || rateCol < 0) {
    throw new Error("metrics.csv missing expected columns");
  }
  const accuracy: SeriesPoint[] = [];
  const transformation: SeriesPoint[] = [];
  for (const line of lines.slice(1)) {
    const cols = line.split(",");
    accuracy.push({ state: cols[stateCol], raw: cols[accCol], value: Number(cols[accCol]) });
    transformation.push({
      state: cols[stateCol],
      raw: cols[rateCol],
      value: Number(cols[rateCol]),
    });
  }
  return { accuracy, transformation };
}

function polylinePoints(series: SeriesPoint[], width: number, height: number, pad: number): string {
  if (series.length === 0) return "";
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const step = series.length > 1 ? innerW / (series.length - 1) : 0;
  return series
    .map((point, i) => {
      const x = pad + i * step;
      const y = pad + (1 - point.value) * innerH;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

/** Two-series SVG line chart (accuracy, transformation rate) in iteration order. */
export function renderChartSvg(data: ChartData, width = 560, height = 220): string {
  const pad = 24;
  const acc = polylinePoints(data.accuracy, width, height, pad);
  const rate = polylinePoints(data.transformation, width, height, pad);
  const labels = data.accuracy
    .map((point, i) => {
      const step = data.accuracy.length > 1 ? (width - 2 * pad) / (data.accuracy.length - 1) : 0;
      const x = pad + i * step;
      return `<text x="${x.toFixed(1)}" y="${height - 6}" class="chart-label">${point.state.replace(
        "IgbTC-",
        ""
      )}</text>`;
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="metrics by iteration">` +
    `<rect x="0" y="0" width="${width}" height="${height}" class="chart-bg"/>` +
    `<polyline points="${rate}" class="series-transformation" fill="none"/>` +
    `<polyline points="${acc}" class="series-accuracy" fill="none"/>` +
    labels +
    `</svg>`
  );
}
