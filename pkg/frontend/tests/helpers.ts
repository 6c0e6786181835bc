import { JSDOM } from "jsdom";

import { FetchFn } from "../src/api";

export interface Dom {
  window: JSDOM["window"];
  root: HTMLElement;
}

export function makeDom(): Dom {
  const jsdom = new JSDOM('<!DOCTYPE html><div id="app"></div>');
  return {
    window: jsdom.window,
    root: jsdom.window.document.getElementById("app") as HTMLElement,
  };
}

/** Let queued promise callbacks (click handlers are async) settle. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

/** Poll until the predicate holds; for flows backed by real HTTP. */
export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 10000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error("waitFor timed out");
    await new Promise((resolve) => setTimeout(resolve, 20));
  }
}

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function click(element: Element | null): void {
  if (!element) throw new Error("element not found");
  (element as HTMLElement).click();
}

/** In-memory stand-in for the learning service: same endpoints, same
 * event-order rules, so component tests exercise realistic flows. */
export function fakeLearningApi(options?: {
  items?: Array<{ item_id: string; stem: string; choices: Record<string, string> }>;
  correct?: string;
  comment?: string;
}): { fetchFn: FetchFn; calls: string[] } {
  const items = options?.items ?? [
    {
      item_id: "exam-1:1",
      stem: "Which symptom is typical?",
      choices: { A: "pain", B: "rash", C: "cough", D: "fever", E: "nausea" },
    },
    {
      item_id: "exam-1:2",
      stem: "Second question stem",
      choices: { A: "a", B: "b", C: "c", D: "d", E: "e" },
    },
  ];
  const correct = options?.correct ?? "C";
  const comment =
    options?.comment ?? "Typical finding is cough [doc:M1]. See also [doc:M2].";
  const sources = [
    { doc_id: "M1", title: "Handbook chapter 4", url_or_locator: "hb:4" },
    { doc_id: "M2", title: "Guideline 2023", url_or_locator: "gl:2023" },
  ];
  const phase = new Map<string, "shown" | "revealed">();
  let cursor = 0;
  const calls: string[] = [];

  const fetchFn: FetchFn = async (url, init) => {
    const method = init?.method ?? "GET";
    calls.push(`${method} ${url}`);
    const path = url.replace(/^.*\/api\/v1/, "");
    let match: RegExpMatchArray | null;
    if (method === "POST" && /\/users\/[^/]+\/next$/.test(path)) {
      if (cursor >= items.length) return new Response(null, { status: 204 });
      const item = items[cursor];
      phase.set(item.item_id, "shown");
      return jsonResponse(200, item);
    }
    if ((match = path.match(/\/users\/[^/]+\/items\/([^/]+)\/answer$/))) {
      const itemId = decodeURIComponent(match[1]);
      if (phase.get(itemId) !== "shown") {
        return jsonResponse(409, { detail: "item was not served" });
      }
      phase.set(itemId, "revealed");
      const body = JSON.parse(String(init?.body)) as { letter: string };
      return jsonResponse(200, {
        item_id: itemId,
        chosen: body.letter,
        correct,
        comment,
        sources,
      });
    }
    if ((match = path.match(/\/users\/[^/]+\/items\/([^/]+)\/grade$/))) {
      const itemId = decodeURIComponent(match[1]);
      if (phase.get(itemId) !== "revealed") {
        return jsonResponse(409, { detail: "grade before reveal" });
      }
      phase.delete(itemId);
      cursor += 1;
      return jsonResponse(200, { item_id: itemId, due: 101.0 });
    }
    return jsonResponse(404, { detail: `no such endpoint: ${path}` });
  };
  return { fetchFn, calls };
}
