import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    // Engine-in-the-loop tests spawn a simulator subprocess per episode.
    testTimeout: 120_000,
    hookTimeout: 120_000,
    pool: 'forks',
  },
});
