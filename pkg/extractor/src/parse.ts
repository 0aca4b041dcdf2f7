/**
 * Turns raw description-model replies into clean description strings.
 *
 * Model replies arrive as chat prose: usually a numbered or bulleted
 * list, often wrapped in a preamble ("Sure! Here are..."), sometimes
 * with items spilling over multiple lines, markdown emphasis, or a
 * closing pleasantry. The parser extracts the list items and strips the
 * artifacts; when no list structure is present at all the whole reply
 * counts as a single description. An empty result therefore means the
 * model genuinely produced nothing usable.
 */

/** Leading list markers: "1." "2)" "(3)" "10:" "4 -" "-" "*" "•". */
const LIST_MARKER = /^\s*(?:\(?\d{1,3}\)?\s*[.):\]]|\d{1,3}\s+[-–—]|[-*•])\s+/;

function cleanItem(text: string): string {
  return text
    .replace(/[*_`]{1,3}/g, "") // markdown emphasis and code ticks
    .replace(/\s+/g, " ")
    .replace(/^["'“‘]+|["'”’]+$/g, "")
    .trim();
}

export function parseDescriptions(raw: string): string[] {
  const items: string[] = [];
  let open = false;
  for (const rawLine of raw.split(/\r?\n/)) {
    // strip bold/code wrapping first so "**1.** foo" still counts as
    // numbered; single "*" stays, it may be a bullet
    const line = rawLine.replace(/\*{2,3}|_{2,3}|`{1,3}/g, "");
    const marker = LIST_MARKER.exec(line);
    if (marker) {
      items.push(line.slice(marker[0].length));
      open = true;
    } else if (line.trim() === "") {
      open = false;
    } else if (open) {
      // wrapped continuation of the previous item
      items[items.length - 1] += ` ${line.trim()}`;
    }
    // non-blank prose outside any item (preamble, closing remark) is dropped
  }

  if (items.length === 0) {
    const whole = cleanItem(raw);
    return whole === "" ? [] : [whole];
  }
  return items.map(cleanItem).filter((item) => item !== "");
}
