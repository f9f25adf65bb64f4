// Shared test plumbing: real template documents, an http transport that
// bypasses the DOM emulator's network stack, and a DOM wait loop.

import { execFileSync } from "node:child_process";
import http from "node:http";
import path from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchFn, FetchResponseLike, TemplateDoc } from "../src/api";

const here = path.dirname(fileURLToPath(import.meta.url));

export function realTemplates(): TemplateDoc[] {
  const out = execFileSync(
    "python3", [path.join(here, "judge_drafts.py"), "templates"],
    { encoding: "utf8", maxBuffer: 1 << 26 });
  return JSON.parse(out) as TemplateDoc[];
}

export function templateById(templates: TemplateDoc[],
                             id: string): TemplateDoc {
  const found = templates.find((t) => t.template === id);
  if (!found) throw new Error(`no template ${id}`);
  return found;
}

/** Plain node:http fetch substitute; enough for the ApiClient. */
export const nodeFetch: FetchFn = (input, init) =>
  new Promise<FetchResponseLike>((resolve, reject) => {
    const request = http.request(input, {
      method: init?.method ?? "GET",
      headers: (init?.headers as Record<string, string>) ?? {},
    }, (response) => {
      const chunks: Buffer[] = [];
      response.on("data", (chunk: Buffer) => chunks.push(chunk));
      response.on("end", () => {
        const status = response.statusCode ?? 0;
        resolve({
          ok: status >= 200 && status < 300,
          status,
          statusText: response.statusMessage ?? "",
          text: () => Promise.resolve(Buffer.concat(chunks).toString("utf8")),
        });
      });
    });
    request.on("error", reject);
    if (init?.body) request.write(init.body);
    request.end();
  });

export async function waitFor<T>(probe: () => T | null | undefined | false,
                                 what: string, timeoutMs = 15000,
                                 stepMs = 50): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = probe();
    if (got) return got;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
}

export interface FakeRoute {
  method: string;
  path: string | RegExp;
  reply: (body: unknown) =>
    { status: number; body: unknown } | Promise<{ status: number; body: unknown }>;
}

/** Scriptable in-memory transport; records every request it serves. */
export function fakeFetch(routes: FakeRoute[]):
    { fetchFn: FetchFn; calls: { method: string; path: string }[] } {
  const calls: { method: string; path: string }[] = [];
  const fetchFn: FetchFn = async (input, init) => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://fake");
    const target = url.pathname + url.search;
    calls.push({ method, path: target });
    const route = routes.find((r) => r.method === method &&
      (typeof r.path === "string" ? r.path === target : r.path.test(target)));
    if (!route) {
      return { ok: false, status: 404, statusText: "Not Found",
               text: () => Promise.resolve(JSON.stringify(
                 { error: "not_found", detail: target, violations: [] })) };
    }
    const parsed = init?.body ? JSON.parse(init.body as string) : undefined;
    const { status, body } = await route.reply(parsed);
    return { ok: status >= 200 && status < 300, status, statusText: "",
             text: () => Promise.resolve(JSON.stringify(body)) };
  };
  return { fetchFn, calls };
}
