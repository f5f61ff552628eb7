import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import pandas as pd

from .calibration import build_profile
from .errors import DscPanningError, ValidationError
from .experiments import LOCALIZATION_ANGLES, LOUDNESS_ANGLES, run_localization_experiment, run_loudness_experiment
from .filter_utils import CALIBRATION_WEIGHTING, WeightingSpec
from .io import (load_irs, load_layout, load_profile, load_room, load_scene, read_ir, save_irs, save_profile,
                 write_wav)
from .ir_analysis_utils import FdtParams, analyze_ir, fdt_truncate, with_detected_onset
from .localization_utils import prediction_grid
from .model import RenderMode, RoomModel, near_far_stereo_layout
from .panning_utils import DEFAULT_P, gain_table, mode_gains
from .plot_utils import plot_ir_analysis
from .renderer import DEFAULT_BLOCK_SIZE, RendererConfig, render, render_streaming
from .room_sim import DEFAULT_IR_DURATION_S, DEFAULT_SAMPLE_RATE, DEFAULT_SEED, synth_irs

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "DSC_RENDER_SEED"
# Critical distance giving a 3 dB full-response difference for speakers at 1.5 m and 3.0 m:
NEAR_FAR_CRITICAL_DISTANCE_M = 2.114

EXIT_OK = 0
EXIT_DATA_ERROR = 3


def default_seed() -> int:
    value = os.environ.get(SEED_ENV_VAR)
    if value is None:
        return DEFAULT_SEED
    try:
        return int(value)
    except ValueError:
        raise ValidationError(f"{SEED_ENV_VAR} must be an integer, got '{value}'")


def _fdt_params(args):
    return FdtParams(tau_s=args.tau_ms * 1e-3, f_low_hz=args.f_low, f_high_hz=args.f_high,
                     bands_per_octave=args.bands_per_octave)


def _room(args, layout_path=None, critical_distance_m=None):
    """
    Room model of the "room" block of the layout document, each of --critical-distance,
    --speed-of-sound and --rt60 overriding its field.
    """
    room = load_room(layout_path) if layout_path is not None else None
    if room is None:
        critical_distance_m = args.critical_distance or critical_distance_m
        if critical_distance_m is None:
            raise ValidationError("no room model: pass --critical-distance or add a 'room' block to the layout")
        room = RoomModel(critical_distance_m=critical_distance_m)
    overrides = {"critical_distance_m": args.critical_distance, "speed_of_sound": args.speed_of_sound,
                 "rt60_s": args.rt60}
    return replace(room, **{name: value for name, value in overrides.items() if value is not None})


def cmd_calibrate(args):
    layout = load_layout(args.layout)
    if args.ir_dir is not None:
        irs = load_irs(args.ir_dir, layout)
        room = None
    else:
        irs = None
        room = _room(args, args.layout)
    profile = build_profile(layout, room=room, irs=irs,
                            weighting=WeightingSpec.from_name(args.weighting),
                            fdt_params=_fdt_params(args),
                            l_ref_db=args.l_ref, l_ref_ds_db=args.l_ref_ds,
                            speed_of_sound=args.speed_of_sound)
    save_profile(profile, args.output)
    print(profile.to_frame().to_string(float_format="%.2f"))
    print(f"Calibration profile written to {args.output}")


def cmd_render(args):
    scene = load_scene(args.scene)
    layout = load_layout(args.layout)
    profile = load_profile(args.calibration)
    config = RendererConfig(block_size=args.block_size, crossfade_samples=args.crossfade, p=args.p)
    render_fn = render_streaming if args.streaming else render
    feeds = render_fn(scene, layout, profile, RenderMode(args.mode), config)
    write_wav(args.output, feeds, scene.sample_rate_hz)
    print(f"Rendered {len(scene.objects)} objects to {feeds.shape[1]} channels "
          f"({feeds.shape[0]} samples) in {args.output}")


def cmd_gains(args):
    layout = load_layout(args.layout)
    profile = load_profile(args.calibration).check_covers(layout)
    table = gain_table(args.theta, layout, profile, args.p)
    table["mode_gain"] = mode_gains(args.theta, layout, profile, RenderMode(args.mode), args.p).gains
    if args.format == "csv":
        print(table.to_csv(), end="")
    elif args.format == "json":
        print(table.reset_index().to_json(orient="records", indent=2))
    else:
        print(table.to_string(float_format="%.5f"))


def cmd_simulate_room(args):
    layout = load_layout(args.layout)
    room = _room(args, args.layout)
    seed = default_seed() if args.seed is None else args.seed
    irs = synth_irs(layout, room, args.sample_rate, seed, args.duration)
    save_irs(irs, args.output_dir)
    print(f"Wrote {len(irs)} impulse responses (seed {seed}) to {args.output_dir}")


def cmd_predict(args):
    layout = load_layout(args.layout)
    profile = load_profile(args.calibration).check_covers(layout)
    grid = prediction_grid(layout, profile, args.step, args.p)
    if args.output is not None:
        grid.to_csv(args.output, index=False)
        print(f"Prediction grid written to {args.output}")
    else:
        print(grid.to_csv(index=False), end="")


def cmd_analyze(args):
    params = _fdt_params(args)
    weighting = WeightingSpec.from_name(args.weighting)
    irs, truncated, rows = {}, {}, {}
    for ir_path in args.irs:
        name = Path(ir_path).stem
        irs[name] = with_detected_onset(read_ir(ir_path))
        truncated[name] = fdt_truncate(irs[name], params)
        rows[name] = analyze_ir(irs[name], params, weighting)
    table = pd.DataFrame(rows).T
    table.index.name = "ir"
    table["onset_index"] = table["onset_index"].astype("int64")
    print(table.to_string(float_format="%.2f"))
    if args.plot is not None:
        plot_ir_analysis(irs, truncated, args.plot)
        print(f"Plot saved to {args.plot}")


def cmd_experiment(args):
    if args.layout is not None:
        layout = load_layout(args.layout)
        room = _room(args, args.layout)
    else:
        layout = near_far_stereo_layout()
        room = _room(args, critical_distance_m=NEAR_FAR_CRITICAL_DISTANCE_M)
    seed = default_seed() if args.seed is None else args.seed
    out_dir = Path(args.out_dir) / args.name
    out_dir.mkdir(exist_ok=True, parents=True)

    irs = synth_irs(layout, room, args.sample_rate, seed)
    profile = build_profile(layout, room=room, irs=irs)
    save_profile(profile, out_dir / "calibration.json")

    localization = run_localization_experiment(layout, profile, args.localization_angles)
    localization.to_csv(out_dir / "localization.csv", index=False)
    loudness = run_loudness_experiment(layout, room, profile, args.loudness_angles,
                                       sample_rate_hz=args.sample_rate, seed=seed)
    loudness.to_csv(out_dir / "loudness.csv", index=False)

    print(profile.to_frame().to_string(float_format="%.2f"))
    print("\nLocalization (predicted azimuth, deg):")
    print(localization.pivot(index="theta_deg", columns="condition", values="predicted_deg")
          .to_string(float_format="%.2f"))
    print("\nLoudness at the listener (dB vs REF):")
    print(loudness.pivot(index="theta_deg", columns="condition", values="delta_ref_db")
          .to_string(float_format="%.2f"))
    print(f"\nResults written to {out_dir}")


def _add_fdt_args(parser):
    parser.add_argument('--tau-ms', type=float, default=FdtParams.tau_s * 1e3,
                        help="truncation time of the lowest band")
    parser.add_argument('--f-low', type=float, default=FdtParams.f_low_hz)
    parser.add_argument('--f-high', type=float, default=FdtParams.f_high_hz)
    parser.add_argument('--bands-per-octave', type=int, default=FdtParams.bands_per_octave)


def _add_room_args(parser):
    parser.add_argument('--critical-distance', type=float, default=None, help="D_c in meters")
    parser.add_argument('--speed-of-sound', type=float, default=None)
    parser.add_argument('--rt60', type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsc_panning",
                                     description="Loudspeaker calibration and object panning with direct "
                                                 "sound compensation for non-equidistant layouts")
    parser.add_argument('-v', '--verbose', action='count', default=0)
    subparsers = parser.add_subparsers(dest="command", required=True)

    calibrate = subparsers.add_parser("calibrate", help="build a calibration profile")
    calibrate.add_argument('layout')
    source = calibrate.add_mutually_exclusive_group(required=True)
    source.add_argument('--ir-dir', type=str, default=None, help="directory with one <speaker id>.wav per speaker")
    source.add_argument('--model', action='store_true', help="use the distance-decay room model")
    calibrate.add_argument('-o', '--output', type=str, default="calibration.json")
    calibrate.add_argument('--weighting', choices=["none", "a", "pink", "pink+a"],
                           default=CALIBRATION_WEIGHTING.name)
    calibrate.add_argument('--l-ref', type=float, default=None)
    calibrate.add_argument('--l-ref-ds', type=float, default=None)
    _add_room_args(calibrate)
    _add_fdt_args(calibrate)
    calibrate.set_defaults(func=cmd_calibrate)

    render_parser = subparsers.add_parser("render", help="render a scene to speaker feeds")
    render_parser.add_argument('scene')
    render_parser.add_argument('layout')
    render_parser.add_argument('calibration')
    render_parser.add_argument('--mode', choices=[mode.value for mode in RenderMode], default=RenderMode.DSC.value)
    render_parser.add_argument('-o', '--output', type=str, required=True)
    render_parser.add_argument('--block-size', type=int, default=DEFAULT_BLOCK_SIZE)
    render_parser.add_argument('--crossfade', type=int, default=DEFAULT_BLOCK_SIZE, help="crossfade in samples")
    render_parser.add_argument('-p', type=float, default=DEFAULT_P)
    render_parser.add_argument('--streaming', action='store_true', help="render block by block")
    render_parser.set_defaults(func=cmd_render)

    gains = subparsers.add_parser("gains", help="stage-by-stage gains for one direction")
    gains.add_argument('layout')
    gains.add_argument('calibration')
    gains.add_argument('--theta', type=float, required=True)
    gains.add_argument('--mode', choices=[mode.value for mode in RenderMode], default=RenderMode.DSC.value)
    gains.add_argument('-p', type=float, default=DEFAULT_P)
    gains.add_argument('--format', choices=["table", "csv", "json"], default="table")
    gains.set_defaults(func=cmd_gains)

    simulate = subparsers.add_parser("simulate-room", help="write synthetic room impulse responses")
    simulate.add_argument('layout')
    simulate.add_argument('-o', '--output-dir', type=str, required=True)
    simulate.add_argument('--sample-rate', type=float, default=DEFAULT_SAMPLE_RATE)
    simulate.add_argument('--duration', type=float, default=DEFAULT_IR_DURATION_S)
    simulate.add_argument('--seed', type=int, default=None)
    _add_room_args(simulate)
    simulate.set_defaults(func=cmd_simulate_room)

    predict = subparsers.add_parser("predict", help="predicted phantom source azimuths over the layout span")
    predict.add_argument('layout')
    predict.add_argument('calibration')
    predict.add_argument('--step', type=float, default=1.)
    predict.add_argument('-p', type=float, default=DEFAULT_P)
    predict.add_argument('-o', '--output', type=str, default=None)
    predict.set_defaults(func=cmd_predict)

    analyze = subparsers.add_parser("analyze", help="onset, levels and direct-to-reverberant ratio of IRs")
    analyze.add_argument('irs', nargs='+')
    analyze.add_argument('--weighting', choices=["none", "a", "pink", "pink+a"],
                         default=CALIBRATION_WEIGHTING.name)
    analyze.add_argument('--plot', type=str, default=None)
    _add_fdt_args(analyze)
    analyze.set_defaults(func=cmd_analyze)

    experiment = subparsers.add_parser("experiment", help="model-level localization and loudness experiments")
    experiment.add_argument('--layout', type=str, default=None, help="defaults to the near/far stereo setup")
    experiment.add_argument('--name', type=str, default="near_far_stereo")
    experiment.add_argument('--out-dir', type=str, default="experiment_results")
    experiment.add_argument('--sample-rate', type=float, default=DEFAULT_SAMPLE_RATE)
    experiment.add_argument('--seed', type=int, default=None)
    experiment.add_argument('--localization-angles', type=float, nargs='+', default=list(LOCALIZATION_ANGLES))
    experiment.add_argument('--loudness-angles', type=float, nargs='+', default=list(LOUDNESS_ANGLES))
    _add_room_args(experiment)
    experiment.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DscPanningError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
