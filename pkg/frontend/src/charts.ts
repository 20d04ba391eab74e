// Hand-rolled SVG bar charts for the allocation comparison panel.
// Grouped layout: one group per allocation, one bar per series entry.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Bar {
  label: string;
  value: number;
  color?: string;
}

export interface BarGroup {
  label: string;
  bars: Bar[];
}

export interface BarChartSpec {
  title: string;
  groups: BarGroup[];
  format?: (value: number) => string;
}

const PALETTE = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

const WIDTH = 440;
const HEIGHT = 260;
const MARGIN = { top: 36, right: 12, bottom: 44, left: 12 };

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function text(x: number, y: number, content: string, cls: string, anchor = "middle") {
  const node = svgEl("text", {
    x: x.toFixed(1),
    y: y.toFixed(1),
    "text-anchor": anchor,
    class: cls,
  });
  node.textContent = content;
  return node;
}

export function barChart(spec: BarChartSpec): SVGSVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: "bar-chart",
    role: "img",
  });
  svg.append(text(WIDTH / 2, 20, spec.title, "chart-title"));

  const plotWidth = WIDTH - MARGIN.left - MARGIN.right;
  const plotHeight = HEIGHT - MARGIN.top - MARGIN.bottom;
  const baseline = MARGIN.top + plotHeight;
  const fmt = spec.format ?? ((v: number) => v.toPrecision(4));

  const values = spec.groups.flatMap((g) => g.bars.map((b) => b.value));
  const maxValue = Math.max(0, ...values);
  const scale = maxValue > 0 ? plotHeight / (maxValue * 1.12) : 0;

  svg.append(
    svgEl("line", {
      x1: String(MARGIN.left),
      x2: String(WIDTH - MARGIN.right),
      y1: String(baseline),
      y2: String(baseline),
      class: "chart-axis",
    }),
  );

  const groupCount = spec.groups.length;
  if (groupCount === 0) {
    svg.append(text(WIDTH / 2, HEIGHT / 2, "no data", "chart-empty"));
    return svg;
  }

  const groupWidth = plotWidth / groupCount;
  spec.groups.forEach((group, gi) => {
    const innerPad = groupWidth * 0.15;
    const usable = groupWidth - 2 * innerPad;
    const barWidth = Math.min(60, usable / Math.max(1, group.bars.length));
    const startX =
      MARGIN.left + gi * groupWidth + (groupWidth - barWidth * group.bars.length) / 2;

    group.bars.forEach((bar, bi) => {
      const h = bar.value > 0 ? Math.max(1, bar.value * scale) : 0;
      const x = startX + bi * barWidth;
      const rect = svgEl("rect", {
        x: x.toFixed(1),
        y: (baseline - h).toFixed(1),
        width: (barWidth * 0.88).toFixed(1),
        height: h.toFixed(1),
        fill: bar.color ?? PALETTE[bi % PALETTE.length],
        class: "bar",
        "data-value": String(bar.value),
        "data-label": bar.label,
      });
      const title = svgEl("title", {});
      title.textContent = `${group.label} / ${bar.label}: ${fmt(bar.value)}`;
      rect.append(title);
      svg.append(rect);
      svg.append(
        text(x + (barWidth * 0.88) / 2, baseline - h - 4, fmt(bar.value), "bar-value"),
      );
    });
    svg.append(text(MARGIN.left + gi * groupWidth + groupWidth / 2, baseline + 16, group.label, "group-label"));
  });

  // legend only when groups carry multiple series; colors follow the bars
  const series = new Map<string, string>();
  spec.groups.forEach((group) => {
    group.bars.forEach((bar, bi) => {
      if (!series.has(bar.label)) {
        series.set(bar.label, bar.color ?? PALETTE[bi % PALETTE.length]);
      }
    });
  });
  if (series.size > 1) {
    let i = 0;
    for (const [label, color] of series) {
      const lx = MARGIN.left + i * 110;
      const ly = HEIGHT - 8;
      svg.append(
        svgEl("rect", {
          x: String(lx),
          y: String(ly - 9),
          width: "10",
          height: "10",
          fill: color,
          class: "legend-swatch",
        }),
      );
      svg.append(text(lx + 14, ly, label, "legend-label", "start"));
      i += 1;
    }
  }
  return svg;
}
