import argparse
import subprocess
import sys

from dsc_panning.experiments import combine_results_from_multiple_experiments


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument('--exp_name', type=str, default="near_far_stereo")
    parser.add_argument('--nb_seeds', type=int, default=5)
    args = parser.parse_args()

    EXP_NAME = args.exp_name
    RESULTS_DIR = f"./experiment_results/{EXP_NAME}"

    python_interpreter = sys.executable
    all_options_to_run = [
        f"experiment --seed {seed} --name seed_{seed} --out-dir {RESULTS_DIR}"
        for seed in range(args.nb_seeds)
    ]
    for i, options in enumerate(all_options_to_run):
        full_command = '"{}" -m dsc_panning {}'.format(python_interpreter, options)
        print(f"\n\n\n####### Running experiment {i + 1}/{len(all_options_to_run)}... ###### ")
        print(full_command)
        subprocess.run(full_command, shell=True, check=True)

    all_exp_dirs = [f"{RESULTS_DIR}/seed_{seed}" for seed in range(args.nb_seeds)]

    localization = combine_results_from_multiple_experiments(all_exp_dirs, "localization")
    localization.to_csv(f"{RESULTS_DIR}/collected_localization.csv", index=False)

    loudness = combine_results_from_multiple_experiments(all_exp_dirs, "loudness")
    loudness.to_csv(f"{RESULTS_DIR}/collected_loudness.csv", index=False)
    # Average over the seeds of the diffuse tails:
    summary = loudness.groupby(["theta_deg", "condition"])["delta_ref_db"].agg(["mean", "std"])
    summary.to_csv(f"{RESULTS_DIR}/loudness_summary.csv")
    print(summary.to_string(float_format="%.2f"))
