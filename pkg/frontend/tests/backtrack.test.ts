// Secondary criterion: restoring a gallery row into the options form must
// serialize identically to the stored request.

import { describe, expect, it } from 'vitest';

import { entryToForm, formToOptions, serializeOptions } from '../src/backtrack.js';
import type { GenerateOptions } from '../src/types.js';
import { sampleEntry } from './fake_api.js';

const VARIANTS: Partial<GenerateOptions>[] = [
  {},
  { target: 'background', method: 'unconditional', mask_variant: null, strength: null },
  { prompt_object: 'sun', prompt_description: '', seed: 0 },
  { mask_variant: 'stroke_band', seed: -3, strength: 0.25 },
  { prompt_object: 'a pile of books', prompt_description: 'cozy shelf', seed: 987654321 },
];

describe('gallery backtracking', () => {
  it('restored options serialize identically to the stored request', () => {
    for (const overrides of VARIANTS) {
      const entry = sampleEntry(overrides);
      const restored = formToOptions(entryToForm(entry));
      expect(serializeOptions(restored)).toBe(serializeOptions(entry.options));
    }
  });

  it('round-trips null mask variant and strength through empty fields', () => {
    const entry = sampleEntry({ mask_variant: null, strength: null });
    const form = entryToForm(entry);
    expect(form.maskVariant).toBe('');
    expect(form.strength).toBe('');
    const options = formToOptions(form);
    expect(options.mask_variant).toBeNull();
    expect(options.strength).toBeNull();
  });

  it('is lossless across repeated backtracks', () => {
    const entry = sampleEntry({ seed: 7 });
    let options = entry.options;
    for (let i = 0; i < 3; i++) {
      options = formToOptions(entryToForm({ ...entry, options }));
    }
    expect(serializeOptions(options)).toBe(serializeOptions(entry.options));
  });
});
