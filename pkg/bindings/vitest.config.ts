import { defineConfig } from "vitest/config";

// Every parity test shells out to the core CLI several times; interpreter
// startup dominates, so give each test far more than the 5 s default.
export default defineConfig({
  test: {
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
