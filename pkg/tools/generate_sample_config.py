"""
Write a parameter file skeleton for kernel-verify.

The file holds the default Sigma parameters, test function and truncation so that a run
can be reproduced or varied by editing a single JSON document.
"""
import argparse
import json
import os
import sys

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from models.geometric import GlobalTestFunction, SigmaParams, TruncationSpec
from services.config_service import DEFAULT_CONFIG


def sample_parameters(X: float = 50.0) -> dict:
    """Default sections plus explicit Sigma parameters and test function."""
    params = SigmaParams.default(X).to_dict()
    params.pop("Q")
    truncation = TruncationSpec()
    return {
        "seed": DEFAULT_CONFIG["seed"],
        "budgets": dict(DEFAULT_CONFIG["budgets"]),
        "delta": dict(DEFAULT_CONFIG["delta"]),
        "local": dict(DEFAULT_CONFIG["local"]),
        "sigma": {
            "x_values": [X, 2 * X],
            "trunc_gamma": truncation.gamma_radius,
            "trunc_c": truncation.c_max,
            "trunc_e": truncation.e_max,
            "tail_safety": truncation.tail_safety,
            "params": params,
            "test_function": GlobalTestFunction.default().to_dict(),
        },
    }


def main():
    parser = argparse.ArgumentParser(
        description="Generate a sample kernel-verify parameter file",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python tools/generate_sample_config.py --out params.json
  python tools/generate_sample_config.py --out params.json --x 100
        """
    )
    parser.add_argument('--out', default='params.json', help='Output file (default: params.json)')
    parser.add_argument('--x', type=float, default=50.0, help='Smallest X of the comparison runs')
    args = parser.parse_args()

    with open(args.out, 'w', encoding='utf-8') as f:
        json.dump(sample_parameters(args.x), f, indent=4)
    print(f"Parameter file written: {args.out}")


if __name__ == '__main__':
    main()
