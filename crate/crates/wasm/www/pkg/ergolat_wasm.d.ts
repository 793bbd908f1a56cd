/* tslint:disable */
/* eslint-disable */

/**
 * The pair `Λ_c ⊂ Λ_f` in the plane with `Λ_f` built from the code spanned
 * by `(1, a)` over GF(p).
 */
export class LatticeDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Rows of the coarse generator, `[g11, g12, g21, g22]`.
     */
    coarse_basis(): Float64Array;
    /**
     * Codewords as `[x, y]` pairs, all inside the coarse cell.
     */
    codebook(): Float64Array;
    /**
     * `count` dither samples as `[x, y]` pairs, uniform over the coarse cell.
     */
    dither_samples(count: number, seed: number): Float64Array;
    constructor(p: number, a: number, power: number);
    rate(): number;
    /**
     * `[s mod Λ_c, nearest fine point mod Λ_c]` for the point `s = (x, y)`.
     */
    reduce(x: number, y: number): Float64Array;
}

export function siso_curves(model: string, db_start: number, db_end: number, db_step: number): Float64Array;

export function two_user_region(rho_db: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_latticedemo_free: (a: number, b: number) => void;
    readonly latticedemo_coarse_basis: (a: number) => [number, number];
    readonly latticedemo_codebook: (a: number) => [number, number];
    readonly latticedemo_dither_samples: (a: number, b: number, c: number) => [number, number];
    readonly latticedemo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly latticedemo_rate: (a: number) => number;
    readonly latticedemo_reduce: (a: number, b: number, c: number) => [number, number, number, number];
    readonly siso_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly two_user_region: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
