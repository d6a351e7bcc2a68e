"""Command-line pipeline driver.

One executable, one subcommand per stage:

    gen-pattern  write the RGB phase-speckle projector pattern
    simulate     render a stereo pair of a scene under a pattern (+ GT)
    ppn          decode a capture to wrapped phase / modulation / mask
    graycode     gen | decode | gt
    match        block-match two captures (rgb or phase mode)
    evaluate     EPE / D1 report with error heatmap and histogram
    compare      merge evaluate reports into CSV + figure
    reconstruct  triangulate disparity to a colored PLY cloud
    ablate       clean-vs-perturbed x rgb-vs-phase grid, CSV + figures

Every command records a manifest.json (parameters, seeds, input and output
content hashes) in its output directory, and reruns with the same inputs
produce byte-identical artifacts.  Flags override config-file fields.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import graycode as gc
from . import matching, metrics, ppn, recon, report
from .imgcore import (
    GrayImage,
    RgbImage,
    ValidityMask,
    read_float_pfm,
    read_mask_png,
    read_pfm,
    read_png,
    write_float_pfm,
    write_gray_png,
    write_mask_png,
    write_pfm,
    write_png,
)
from .pattern import PatternParams, gen_speckle_pattern
from .simulate import PRESET_NAMES as PRESETS
from .simulate import RigSpec, SceneSpec, perturb, preset_scene, render


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(out_dir, command, params, inputs=None, outputs=None, seed=None):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "inputs": {k: {"path": v, "sha256": _sha256(v)} for k, v in (inputs or {}).items()},
        "outputs": {k: {"path": v, "sha256": _sha256(v)} for k, v in (outputs or {}).items()},
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="ascii") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _load_json(path: str) -> dict:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _load_rig(path_or_none) -> RigSpec:
    if path_or_none is None:
        return RigSpec()
    return RigSpec.from_dict(_load_json(path_or_none))


def _load_scene(name_or_path: str, width: int, height: int) -> SceneSpec:
    if name_or_path in PRESETS:
        return preset_scene(name_or_path, width, height)
    return SceneSpec.from_dict(_load_json(name_or_path))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen_pattern(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    for key in ("a", "b", "period", "lo_width", "lo_height", "upsample", "seed"):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    params = PatternParams.from_dict(cfg) if cfg else PatternParams()
    out = _ensure_out(args.out)
    img = gen_speckle_pattern(params)
    png = os.path.join(out, "pattern.png")
    write_png(img, png)
    sidecar = os.path.join(out, "pattern_params.json")
    with open(sidecar, "w", encoding="ascii") as f:
        json.dump(params.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    _write_manifest(
        out,
        "gen-pattern",
        params.to_dict(),
        outputs={"pattern": png, "params": sidecar},
        seed=params.seed,
    )
    return 0


def _render_graycode_stacks(scene, rig, proj_width, out_dir, seed):
    """Render left/right captures of a Gray-code stack through the scene."""
    n_bits = max(1, math.ceil(math.log2(proj_width)))
    stack = gc.gen_stack(proj_width, n_bits)
    left_frames, right_frames = [], []
    for frame in stack.frames:
        res = render(scene, rig, RgbImage.from_gray(frame.data), seed=seed)
        left_frames.append(gc.capture_to_gray(res.left))
        right_frames.append(gc.capture_to_gray(res.right))
    for view, frames in (("left", left_frames), ("right", right_frames)):
        d = _ensure_out(os.path.join(out_dir, f"graycode_{view}"))
        for i, frame in enumerate(frames):
            write_gray_png(frame.data, os.path.join(d, f"frame_{i:03d}.png"))
        with open(os.path.join(d, "stack_manifest.json"), "w", encoding="ascii") as f:
            json.dump(
                {"n_bits": n_bits, "width": proj_width, "frame_count": len(frames)},
                f,
                indent=2,
                sort_keys=True,
            )
            f.write("\n")


def cmd_simulate(args) -> int:
    rig = _load_rig(args.rig)
    scene = _load_scene(args.scene, rig.width, rig.height)
    pattern = read_png(args.pattern)
    out = _ensure_out(args.out)

    result = render(scene, rig, pattern, seed=args.seed)
    paths = {
        "left": os.path.join(out, "left.png"),
        "right": os.path.join(out, "right.png"),
        "disp_gt": os.path.join(out, "disp_gt.pfm"),
        "occlusion": os.path.join(out, "occlusion.png"),
        "proj_coord": os.path.join(out, "proj_coord.pfm"),
        "scene": os.path.join(out, "scene.json"),
    }
    write_png(result.left, paths["left"])
    write_png(result.right, paths["right"])
    write_pfm(result.gt_disparity, paths["disp_gt"])
    write_mask_png(result.occlusion, paths["occlusion"])
    write_float_pfm(result.proj_coord.data, paths["proj_coord"])
    with open(paths["scene"], "w", encoding="ascii") as f:
        json.dump(scene.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")

    if args.graycode:
        _render_graycode_stacks(scene, rig, pattern.width, out, args.seed)

    _write_manifest(
        out,
        "simulate",
        {"scene": args.scene, "rig": rig.to_dict(), "kappa": rig.kappa, "graycode": bool(args.graycode)},
        inputs={"pattern": args.pattern},
        outputs=paths,
        seed=args.seed,
    )
    return 0


def cmd_ppn(args) -> int:
    img = read_png(args.input)
    out = _ensure_out(args.out)
    result = ppn.decode(img, args.mod_threshold)
    paths = {
        "phase": os.path.join(out, "phase.pfm"),
        "modulation": os.path.join(out, "modulation.pfm"),
        "mask": os.path.join(out, "mask.png"),
        "phase_vis": os.path.join(out, "phase_vis.png"),
    }
    write_float_pfm(result.phase.data, paths["phase"])
    write_float_pfm(result.modulation.data, paths["modulation"])
    write_mask_png(result.valid, paths["mask"])
    write_png(report.phase_hue_image(result.phase.data, result.valid.data), paths["phase_vis"])
    _write_manifest(
        out,
        "ppn",
        {"mod_threshold": args.mod_threshold},
        inputs={"input": args.input},
        outputs=paths,
    )
    return 0


def cmd_graycode_gen(args) -> int:
    n_bits = args.bits if args.bits else max(1, math.ceil(math.log2(args.proj_width)))
    stack = gc.gen_stack(args.proj_width, n_bits, args.proj_height)
    out = _ensure_out(args.out)
    paths = {}
    for i, frame in enumerate(stack.frames):
        p = os.path.join(out, f"frame_{i:03d}.png")
        write_gray_png(frame.data, p)
        paths[f"frame_{i:03d}"] = p
    sm = os.path.join(out, "stack_manifest.json")
    with open(sm, "w", encoding="ascii") as f:
        json.dump(
            {"n_bits": n_bits, "width": args.proj_width, "frame_count": len(stack.frames)},
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    paths["stack_manifest"] = sm
    _write_manifest(
        out,
        "graycode gen",
        {"proj_width": args.proj_width, "proj_height": args.proj_height, "n_bits": n_bits},
        outputs=paths,
    )
    return 0


def _load_stack(stack_dir: str) -> gc.GraycodeStack:
    meta = _load_json(os.path.join(stack_dir, "stack_manifest.json"))
    frames = []
    for i in range(meta["frame_count"]):
        img = read_png(os.path.join(stack_dir, f"frame_{i:03d}.png"))
        frames.append(gc.capture_to_gray(img))
    return gc.GraycodeStack(n_bits=meta["n_bits"], frames=frames)


def cmd_graycode_decode(args) -> int:
    stack = _load_stack(args.stack)
    out = _ensure_out(args.out)
    coords = gc.decode_stack(stack, args.contrast_threshold)
    paths = {
        "coords": os.path.join(out, "coords.pfm"),
        "valid": os.path.join(out, "valid.png"),
    }
    write_float_pfm(coords.data, paths["coords"])
    write_mask_png(coords.valid, paths["valid"])
    _write_manifest(
        out,
        "graycode decode",
        {"stack": args.stack, "contrast_threshold": args.contrast_threshold},
        outputs=paths,
    )
    return 0


def cmd_graycode_gt(args) -> int:
    left = gc.CoordMap(read_float_pfm(args.left), read_mask_png(args.left_valid))
    right = gc.CoordMap(read_float_pfm(args.right), read_mask_png(args.right_valid))
    out = _ensure_out(args.out)
    disp, valid = gc.gt_from_stereo(left, right)
    paths = {
        "disp_gt": os.path.join(out, "disp_gt.pfm"),
        "valid": os.path.join(out, "valid.png"),
    }
    write_pfm(disp, paths["disp_gt"])
    write_mask_png(valid, paths["valid"])
    _write_manifest(
        out,
        "graycode gt",
        {},
        inputs={
            "left": args.left,
            "right": args.right,
            "left_valid": args.left_valid,
            "right_valid": args.right_valid,
        },
        outputs=paths,
    )
    return 0


def _load_match_features(path: str, mask_path, mode: str, mod_threshold: float):
    """PNG captures decode per mode; PFM inputs are taken as phase maps."""
    if path.lower().endswith(".pfm"):
        phase = read_float_pfm(path)
        valid = read_mask_png(mask_path).data if mask_path else np.ones(phase.shape, dtype=bool)
        from .pattern import PhaseField

        result = ppn.PpnResult(
            phase=PhaseField(phase),
            modulation=GrayImage(np.ones_like(phase)),
            valid=ValidityMask(valid),
        )
        return matching.embed_phase(result)
    img = read_png(path)
    if mode == "rgb":
        return matching.features_rgb(img)
    return matching.embed_phase(ppn.decode(img, mod_threshold))


def cmd_match(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    for key in ("d_min", "d_max", "window", "mode", "lr_threshold"):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if args.no_subpixel:
        cfg["subpixel"] = False
    params = matching.MatchParams.from_dict(cfg) if cfg else matching.MatchParams()

    left = _load_match_features(args.left, args.left_mask, params.mode, args.mod_threshold)
    right = _load_match_features(args.right, args.right_mask, params.mode, args.mod_threshold)
    out = _ensure_out(args.out)
    disp = matching.match_pair(left, right, params, check=not args.no_lr_check)
    paths = {
        "disp": os.path.join(out, "disp.pfm"),
        "disp_vis": os.path.join(out, "disp_vis.png"),
    }
    write_pfm(disp, paths["disp"])
    write_png(report.disparity_color_image(disp.data, params.d_max), paths["disp_vis"])
    _write_manifest(
        out,
        "match",
        {**params.to_dict(), "lr_check": not args.no_lr_check, "mod_threshold": args.mod_threshold},
        inputs={"left": args.left, "right": args.right},
        outputs=paths,
    )
    return 0


def cmd_evaluate(args) -> int:
    pred = read_pfm(args.pred)
    gt = read_pfm(args.gt)
    mask = read_mask_png(args.mask) if args.mask else None
    out = _ensure_out(args.out)
    rep = metrics.evaluate(
        pred, gt, mask, threshold=args.threshold, penalize_invalid=not args.no_penalize
    )
    paths = {
        "report": os.path.join(out, "report.json"),
        "error_heatmap": os.path.join(out, "error_heatmap.png"),
        "error_hist": os.path.join(out, "error_hist.png"),
    }
    with open(paths["report"], "w", encoding="ascii") as f:
        json.dump(rep.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    vmax = args.vmax if args.vmax else 2.0 * args.threshold
    write_png(report.heatmap_image(rep.error_map.data, vmax), paths["error_heatmap"])
    report.save_error_histogram(rep.error_map.data, paths["error_hist"], args.threshold)
    _write_manifest(
        out,
        "evaluate",
        {"threshold": args.threshold, "penalize_invalid": not args.no_penalize, "vmax": vmax},
        inputs={k: v for k, v in (("pred", args.pred), ("gt", args.gt), ("mask", args.mask)) if v},
        outputs=paths,
    )
    print(f"epe={rep.epe:.6f} d1={rep.d1 * 100.0:.4f}% n={rep.n_evaluated}")
    return 0


def cmd_compare(args) -> int:
    reports = []
    for spec in args.reports:
        if "=" in spec:
            label, path = spec.split("=", 1)
        else:
            label, path = os.path.basename(os.path.dirname(spec)) or spec, spec
        reports.append((label, metrics.EvalReport.from_dict(_load_json(path))))
    out = _ensure_out(args.out)
    paths = {
        "csv": os.path.join(out, "compare.csv"),
        "figure": os.path.join(out, "compare.png"),
    }
    with open(paths["csv"], "w", encoding="ascii") as f:
        f.write(metrics.compare_csv(reports))
    report.save_compare_figure(reports, paths["figure"])
    _write_manifest(out, "compare", {"reports": args.reports}, outputs=paths)
    sys.stdout.write(metrics.compare_table(reports))
    return 0


def cmd_reconstruct(args) -> int:
    disp = read_pfm(args.disp)
    color = read_png(args.color)
    rig = _load_rig(args.rig)
    out = _ensure_out(args.out)
    cloud = recon.triangulate(disp, rig, color, min_disp=args.min_disp)
    ply = os.path.join(out, "cloud.ply")
    cloud.save_ply(ply)
    _write_manifest(
        out,
        "reconstruct",
        {"rig": rig.to_dict(), "min_disp": args.min_disp},
        inputs={"disp": args.disp, "color": args.color},
        outputs={"cloud": ply},
    )
    print(f"wrote {len(cloud)} points")
    return 0


# left-view-only perturbation models mismatched camera ISPs; per-mode match
# params use each mode's best clean-scene window
DEFAULT_ABLATION = {
    "scene": "lowalbedo",
    "pattern": None,     # PatternParams dict; None = defaults
    "rig": None,         # RigSpec dict; None = defaults
    "perturbations": [
        {
            "name": "perturbed",
            "gains": [1.3, 0.8, 1.0],
            "offsets": [0.1, 0.1, 0.1],
            "crosstalk": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            "noise_sigma": 0.0,
            "view": "left",
            "quantize8": False,
        }
    ],
    "match": {
        "rgb": {"d_min": 0, "d_max": 64, "window": 3, "subpixel": True, "lr_threshold": 1.0},
        "phase": {"d_min": 0, "d_max": 64, "window": 5, "subpixel": True, "lr_threshold": 1.0},
    },
    "lr_check": True,
    "mod_threshold": 0.05,
    "eval_threshold": 3.0,
    "penalize_invalid": False,
    "seed": 0,
}

_IDENT3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def run_ablation(config: dict, out_dir: str) -> list:
    """Run the {rgb, phase} x {clean, perturbation...} grid; returns (label, report) pairs.

    Perturbations default to one view only (mismatched-ISP model), so raw-RGB
    matching sees inconsistent photometry while the phase decode cancels it.
    """
    rig = RigSpec.from_dict(config["rig"]) if config.get("rig") else RigSpec()
    scene = (
        preset_scene(config["scene"], rig.width, rig.height)
        if isinstance(config["scene"], str)
        else SceneSpec.from_dict(config["scene"])
    )
    pparams = (
        PatternParams.from_dict(config["pattern"]) if config.get("pattern") else PatternParams()
    )
    seed = int(config.get("seed", 0))
    pattern = gen_speckle_pattern(pparams)
    rendered = render(scene, rig, pattern, seed=seed)

    perturbations = config.get("perturbations")
    if perturbations is None:
        perturbations = [config["perturb"]] if config.get("perturb") else []

    def perturbed_pair(pcfg):
        def apply(img):
            return perturb(
                img,
                gains=tuple(pcfg.get("gains", (1.0, 1.0, 1.0))),
                offsets=tuple(pcfg.get("offsets", (0.0, 0.0, 0.0))),
                crosstalk=tuple(tuple(r) for r in pcfg.get("crosstalk", _IDENT3)),
                noise_sigma=float(pcfg.get("noise_sigma", 0.0)),
                seed=seed,
                quantize8=bool(pcfg.get("quantize8", False)),
            )

        which = pcfg.get("view", "left")
        left = apply(rendered.left) if which in ("left", "both") else rendered.left
        right = apply(rendered.right) if which in ("right", "both") else rendered.right
        return left, right

    pairs = {"clean": (rendered.left, rendered.right)}
    for i, pcfg in enumerate(perturbations):
        pairs[pcfg.get("name", f"perturbed{i if len(perturbations) > 1 else ''}")] = (
            perturbed_pair(pcfg)
        )
    mcfg = dict(config.get("match", {}))
    mod_threshold = float(config.get("mod_threshold", ppn.DEFAULT_MOD_THRESHOLD))
    lr = bool(config.get("lr_check", True))
    results = []
    for mode in ("rgb", "phase"):
        mode_cfg = mcfg.get(mode, mcfg) if ("rgb" in mcfg or "phase" in mcfg) else mcfg
        params = matching.MatchParams.from_dict({**mode_cfg, "mode": mode})
        for condition, (left, right) in pairs.items():
            if mode == "rgb":
                fl, fr = matching.features_rgb(left), matching.features_rgb(right)
            else:
                pl, pr = ppn.decode_pair(left, right, mod_threshold)
                fl, fr = matching.embed_phase(pl), matching.embed_phase(pr)
            disp = matching.match_pair(fl, fr, params, check=lr)
            rep = metrics.evaluate(
                disp,
                rendered.gt_disparity,
                rendered.occlusion,
                threshold=float(config.get("eval_threshold", 3.0)),
                penalize_invalid=bool(config.get("penalize_invalid", False)),
            )
            label = f"{mode}_{condition}"
            results.append((label, rep))
            if out_dir:
                write_png(
                    report.heatmap_image(rep.error_map.data, 2.0 * rep.threshold),
                    os.path.join(out_dir, f"error_{label}.png"),
                )
                with open(os.path.join(out_dir, f"report_{label}.json"), "w", encoding="ascii") as f:
                    json.dump(rep.to_dict(), f, indent=2, sort_keys=True)
                    f.write("\n")
    return results


def cmd_ablate(args) -> int:
    config = dict(DEFAULT_ABLATION)
    if args.config:
        config.update(_load_json(args.config))
    if args.scene:
        config["scene"] = args.scene
    if args.seed is not None:
        config["seed"] = args.seed
    out = _ensure_out(args.out)
    results = run_ablation(config, out)
    paths = {
        "csv": os.path.join(out, "ablation.csv"),
        "figure": os.path.join(out, "ablation.png"),
    }
    with open(paths["csv"], "w", encoding="ascii") as f:
        f.write(metrics.compare_csv(results))
    report.save_compare_figure(results, paths["figure"])
    for label, rep in results:
        paths[f"error_{label}"] = os.path.join(out, f"error_{label}.png")
        paths[f"report_{label}"] = os.path.join(out, f"report_{label}.json")
    _write_manifest(out, "ablate", config, outputs=paths, seed=config.get("seed"))
    sys.stdout.write(metrics.compare_table(results))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasespeckle",
        description="Phase-encoded RGB speckle toolkit for active stereo",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-pattern", help="generate the projector speckle pattern")
    p.add_argument("--config", help="PatternParams JSON")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--period", type=float)
    p.add_argument("--lo-width", dest="lo_width", type=int)
    p.add_argument("--lo-height", dest="lo_height", type=int)
    p.add_argument("--upsample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_pattern)

    p = sub.add_parser("simulate", help="render a stereo pair with ground truth")
    p.add_argument("--scene", required=True, help=f"preset {PRESETS} or scene JSON path")
    p.add_argument("--rig", help="RigSpec JSON path (default: built-in rig)")
    p.add_argument("--pattern", required=True, help="projector pattern PNG")
    p.add_argument("--graycode", action="store_true", help="also render Gray-code capture stacks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ppn", help="decode a capture to wrapped phase")
    p.add_argument("--input", required=True, help="capture PNG")
    p.add_argument("--mod-threshold", dest="mod_threshold", type=float, default=ppn.DEFAULT_MOD_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ppn)

    p = sub.add_parser("graycode", help="Gray-code stack tools")
    gsub = p.add_subparsers(dest="graycode_command", required=True)

    g = gsub.add_parser("gen", help="generate a projector Gray-code stack")
    g.add_argument("--proj-width", dest="proj_width", type=int, required=True)
    g.add_argument("--proj-height", dest="proj_height", type=int, default=1)
    g.add_argument("--bits", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graycode_gen)

    g = gsub.add_parser("decode", help="decode a captured stack to projector coords")
    g.add_argument("--stack", required=True, help="directory with frame_NNN.png + stack_manifest.json")
    g.add_argument(
        "--contrast-threshold",
        dest="contrast_threshold",
        type=float,
        default=gc.DEFAULT_CONTRAST_THRESHOLD,
    )
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graycode_decode)

    g = gsub.add_parser("gt", help="stereo GT from two decoded coordinate maps")
    g.add_argument("--left", required=True, help="left coords.pfm")
    g.add_argument("--left-valid", dest="left_valid", required=True)
    g.add_argument("--right", required=True, help="right coords.pfm")
    g.add_argument("--right-valid", dest="right_valid", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_graycode_gt)

    p = sub.add_parser("match", help="block-match a stereo pair")
    p.add_argument("--left", required=True, help="PNG capture or phase PFM")
    p.add_argument("--right", required=True)
    p.add_argument("--left-mask", dest="left_mask", help="validity PNG for phase PFM input")
    p.add_argument("--right-mask", dest="right_mask")
    p.add_argument("--config", help="MatchParams JSON")
    p.add_argument("--mode", choices=("rgb", "phase"))
    p.add_argument("--d-min", dest="d_min", type=int)
    p.add_argument("--d-max", dest="d_max", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--lr-threshold", dest="lr_threshold", type=float)
    p.add_argument("--no-subpixel", action="store_true")
    p.add_argument("--no-lr-check", action="store_true")
    p.add_argument("--mod-threshold", dest="mod_threshold", type=float, default=ppn.DEFAULT_MOD_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("evaluate", help="EPE/D1 against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--mask", help="evaluation mask PNG (e.g. occlusion)")
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--no-penalize", action="store_true", help="do not count missing predictions as D1 outliers")
    p.add_argument("--vmax", type=float, help="heatmap scale (default 2x threshold)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="merge evaluate reports to CSV + figure")
    p.add_argument("reports", nargs="+", help="report.json paths, optionally LABEL=PATH")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("reconstruct", help="triangulate disparity to a PLY cloud")
    p.add_argument("--disp", required=True)
    p.add_argument("--color", required=True)
    p.add_argument("--rig", help="RigSpec JSON path (default: built-in rig)")
    p.add_argument("--min-disp", dest="min_disp", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("ablate", help="clean/perturbed x rgb/phase robustness grid")
    p.add_argument("--config", help="experiment JSON (see README)")
    p.add_argument("--scene", help="preset scene override")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        stage = getattr(args, "command", "cli")
        print(f"error: {stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
