import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    environment: "node",
    // the e2e suite spawns a real node process and mines blocks
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
