#!/usr/bin/env python3
"""Regenerate the JSON fixture files under fixtures/.

The fixtures anchor the acceptance suite and double as CLI input examples:

  two_state.json         two-level walk, unique invariant state, drift 1/3
  four_state_p3_sixth.json   four-level family at p = (1/6, 1/6, 1/6)
  four_state_p3_half.json    four-level family at p = (0, 0, 1/2)
  commuting_diag.json    three-level diagonal walk, fully recurrent

plus matching initial states.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from oqwalk import models
from oqwalk.structure import DiagonalState

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)

    models.two_state_biased_walk().save(FIXTURES / "two_state.json")
    models.four_state_family(1 / 6, 1 / 6, 1 / 6).save(
        FIXTURES / "four_state_p3_sixth.json"
    )
    models.four_state_family(0.0, 0.0, 0.5).save(FIXTURES / "four_state_p3_half.json")
    models.default_commuting_walk().save(FIXTURES / "commuting_diag.json")

    e0 = np.zeros((4, 4), dtype=complex)
    e0[0, 0] = 1.0
    DiagonalState.single_site(e0).save(FIXTURES / "state_four_transient.json")

    balanced = np.zeros((4, 4), dtype=complex)
    balanced[1, 1] = balanced[2, 2] = balanced[3, 3] = 1 / 3
    DiagonalState.single_site(balanced).save(FIXTURES / "state_four_balanced.json")

    tau = np.zeros((2, 2), dtype=complex)
    tau[1, 1] = 1.0
    DiagonalState.single_site(tau).save(FIXTURES / "state_two_recurrent.json")

    DiagonalState.single_site(np.eye(3, dtype=complex) / 3).save(
        FIXTURES / "state_commuting_mixed.json"
    )

    for path in sorted(FIXTURES.iterdir()):
        print(f"wrote {path.relative_to(FIXTURES.parent)}")


if __name__ == "__main__":
    main()
