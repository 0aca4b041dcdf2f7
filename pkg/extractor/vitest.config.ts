import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // several tests shell out to the training engine's CLI, whose
    // interpreter startup dominates the test's own work
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
