import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // fixture generation shells out to the reslab CLI
    hookTimeout: 60000,
    testTimeout: 30000,
  },
});
