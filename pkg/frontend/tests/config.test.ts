import { describe, expect, it } from 'vitest';

import { cloneConfig, defaultConfig, nudge, sigmaPreset, validateConfig } from '../src/config.js';

describe('defaults', () => {
  it('match the reference parameter set', () => {
    const config = defaultConfig();
    expect(config.network.n).toBe(100);
    expect(config.network.d).toBe(15);
    expect(config.production.b).toBe(0.95);
    expect(config.production.q).toBe(0);
    expect(config.household.phi).toBe(1.0);
    expect(config.household.L0).toBe(1.0);
    expect(config.dyn.lambda_forecast).toBe(1.0);
    expect(config.run.T).toBe(5000);
    expect(validateConfig(config)).toEqual([]);
  });
});

describe('validation', () => {
  it('rejects d >= n and reports the field path', () => {
    const config = defaultConfig();
    config.network.d = 100;
    const issues = validateConfig(config);
    expect(issues.some((i) => i.path === 'network.d')).toBe(true);
  });

  it('accepts interval parameters and rejects backwards ones', () => {
    const config = defaultConfig();
    config.dyn.alpha = [0.6, 0.7];
    expect(validateConfig(config)).toEqual([]);
    config.dyn.alpha = [0.7, 0.6];
    expect(validateConfig(config).length).toBeGreaterThan(0);
  });

  it('rejects lambda outside [0, 1]', () => {
    const config = defaultConfig();
    config.dyn.lambda_forecast = 1.2;
    expect(validateConfig(config).some((i) => i.path === 'dyn.lambda_forecast')).toBe(true);
  });

  it('requires positive run length', () => {
    const config = defaultConfig();
    config.run.T = 0;
    expect(validateConfig(config).some((i) => i.path === 'run.T')).toBe(true);
  });
});

describe('perishability presets', () => {
  it('maps the toggle to sigma = 0 / inf', () => {
    expect(sigmaPreset('non-perishable')).toBe(0);
    expect(sigmaPreset('immediately-perishable')).toBe('inf');
    const config = defaultConfig();
    config.dyn.sigma = sigmaPreset('immediately-perishable');
    expect(validateConfig(config)).toEqual([]);
  });
});

describe('steering helpers', () => {
  it('clone is deep', () => {
    const config = defaultConfig();
    const copy = cloneConfig(config);
    copy.network.n = 5;
    expect(config.network.n).toBe(100);
  });

  it('nudge scales scalars and intervals', () => {
    const config = defaultConfig();
    config.dyn.alpha = [0.4, 0.5];
    const nudged = nudge(config, 'dyn.alpha', 2);
    expect(nudged.dyn.alpha).toEqual([0.8, 1.0]);
    const nudged2 = nudge(config, 'dyn.omega', 0.5);
    expect(nudged2.dyn.omega).toBeCloseTo(0.05);
  });
});
