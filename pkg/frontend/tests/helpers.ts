import { readFileSync } from "node:fs";

export function fixture<T>(name: string): T {
  return JSON.parse(readFixture(name)) as T;
}

export function readFixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");
}
