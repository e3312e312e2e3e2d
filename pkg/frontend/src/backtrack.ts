// Gallery backtracking: clicking a gallery row restores its generation
// options into the form, and the restored form must serialize identically
// to what the row stored, so regeneration is lossless.

import type { GalleryEntry, GenerateOptions, Method, Target } from './types.js';

export interface OptionsFormState {
  objectText: string;
  descriptionText: string;
  target: Target;
  method: Method;
  maskVariant: string;
  seed: string;
  strength: string;
}

export function entryToForm(entry: GalleryEntry): OptionsFormState {
  const options = entry.options;
  return {
    objectText: options.prompt_object,
    descriptionText: options.prompt_description,
    target: options.target,
    method: options.method,
    maskVariant: options.mask_variant ?? '',
    seed: String(options.seed),
    strength: options.strength === null ? '' : String(options.strength),
  };
}

export function formToOptions(form: OptionsFormState): GenerateOptions {
  return {
    prompt_object: form.objectText,
    prompt_description: form.descriptionText,
    target: form.target,
    method: form.method,
    mask_variant: form.maskVariant === '' ? null : form.maskVariant,
    seed: Number(form.seed) || 0,
    strength: form.strength === '' ? null : Number(form.strength),
  };
}

// Canonical serialization: fixed key order so equality is string equality.
export function serializeOptions(options: GenerateOptions): string {
  return JSON.stringify({
    prompt_object: options.prompt_object,
    prompt_description: options.prompt_description,
    target: options.target,
    method: options.method,
    mask_variant: options.mask_variant,
    seed: options.seed,
    strength: options.strength,
  });
}
