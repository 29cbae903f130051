import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The integration file owns a server process; keep files sequential so
    // two runs never race for the port or starve the simulation thread.
    fileParallelism: false,
  },
});
