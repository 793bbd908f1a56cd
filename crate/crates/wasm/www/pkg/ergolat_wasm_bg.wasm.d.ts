/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_latticedemo_free: (a: number, b: number) => void;
export const latticedemo_coarse_basis: (a: number) => [number, number];
export const latticedemo_codebook: (a: number) => [number, number];
export const latticedemo_dither_samples: (a: number, b: number, c: number) => [number, number];
export const latticedemo_new: (a: number, b: number, c: number) => [number, number, number];
export const latticedemo_rate: (a: number) => number;
export const latticedemo_reduce: (a: number, b: number, c: number) => [number, number, number, number];
export const siso_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const two_user_region: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
