import { readFileSync } from "node:fs";
import { join } from "node:path";

// Compiled tests run from dist-test/test/, fixtures stay in test/fixtures/.
const FIXTURES = join(__dirname, "..", "..", "test", "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}
