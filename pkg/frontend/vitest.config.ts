import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    globalSetup: ["tests/e2e-setup.ts"],
    testTimeout: 30000,
  },
});
