"""Figure-reproduction recipes: each is a list of runs ``(output stem, routine, config patch)``.

The patches are raw config dicts applied on top of the defaults (canonical bath
T = 1, omega_c = 20, gamma = 1e-3), so a recipe is equivalent to a hand-written
config file for the named routine.
"""

from __future__ import annotations

from typing import NamedTuple


class RecipeRun(NamedTuple):
    stem: str
    routine: str
    patch: dict


_FIG2A_DELTAS = sorted({0.0, *(round(0.005 * n, 3) for n in range(1, 7)),
                        *(round(0.025 * n, 3) for n in range(1, 10)), 1.25})
_FIG2B_DELTAS = [0.0, 0.05, 0.25, 1.25]
_FIG7_DELTAS = [0.0, 0.005, 0.01, 0.015, 0.02, 0.025]
_G_AXIS = {"start": -1.0, "stop": 1.0, "num": 21}

RECIPES: dict[str, list[RecipeRun]] = {
    "fig2a": [RecipeRun("fig2a_discord_dissipative", "correlations", {
        "model": {"g": -1.0},
        "initial": {"kind": "product", "theta1": "pi/3.2", "phi1": 0.0, "theta2": "pi/3", "phi2": 0.0},
        "correlations": {"t_max": 400.0, "step": 2.0, "deltas": _FIG2A_DELTAS},
    })],
    "fig2b": [
        RecipeRun("fig2b_discord_dephasing_state1", "correlations", {
            "model": {"g": 1.0},
            "initial": {"kind": "product", "theta1": "pi/3.2", "phi1": 0.0, "theta2": "pi/3", "phi2": 0.0},
            "correlations": {"t_max": 400.0, "step": 2.0, "deltas": _FIG2B_DELTAS},
        }),
        RecipeRun("fig2b_discord_dephasing_state2", "correlations", {
            "model": {"g": 1.0},
            "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/8", "phi2": 0.0},
            "correlations": {"t_max": 400.0, "step": 2.0, "deltas": _FIG2B_DELTAS},
        }),
    ],
    "fig3": [RecipeRun("fig3_entanglement_map_t100", "entanglement-map-t100", {
        "initial": {"kind": "bell", "bell": "psi-"},
        "sweep": {"delta": {"start": 0.0, "stop": 1.25, "num": 26}, "g": _G_AXIS},
    })],
    "fig4": [
        RecipeRun("fig4_trajectory", "evolve", {
            "model": {"omega2": 1.02, "g": -1.0},
            "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/8", "phi2": "pi/2"},
            "evolve": {"t_max": 500.0, "dt": 0.02},
        }),
        RecipeRun("fig4_sync_coefficient", "sync-series", {
            "model": {"omega2": 1.02, "g": -1.0},
            "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/8", "phi2": "pi/2"},
            "sync": {"horizon": 500.0},
        }),
    ],
    "fig5": [RecipeRun("fig5_sync_map", "sync-map", {
        "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/8", "phi2": "pi/2"},
        "sweep": {"delta": {"start": 0.0, "stop": 1.25, "num": 11}, "g": {"start": -1.0, "stop": 1.0, "num": 9}},
        "sync": {"horizon": 500.0},
    })],
    "fig6": [RecipeRun("fig6_discord_vs_sync", "discord-sync-t300", {
        "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/4", "phi2": 0.0},
        "sweep": {"delta": {"values": [0.005, 0.01, 0.025, 0.05, 0.075, 0.1]}, "g": {"values": [-1.0, -0.8]}},
        "sync": {"horizon": 800.0},
    })],
    "fig7": [
        RecipeRun("fig7a_product", "long-time-t800", {
            "initial": {"kind": "product", "theta1": "pi/4", "phi1": 0.0, "theta2": "pi/8", "phi2": 0.0},
            "sweep": {"delta": {"values": _FIG7_DELTAS}, "g": _G_AXIS},
        }),
        RecipeRun("fig7b_phi_plus", "long-time-t800", {
            "initial": {"kind": "bell", "bell": "phi+"},
            "sweep": {"delta": {"values": _FIG7_DELTAS}, "g": _G_AXIS},
        }),
        RecipeRun("fig7c_psi_minus", "long-time-t800", {
            "initial": {"kind": "bell", "bell": "psi-"},
            "sweep": {"delta": {"values": _FIG7_DELTAS}, "g": _G_AXIS},
        }),
        RecipeRun("fig7d_psi_minus_measure_a", "long-time-t800", {
            "initial": {"kind": "bell", "bell": "psi-"},
            "correlations": {"measured_party": "a"},
            "sweep": {"delta": {"values": _FIG7_DELTAS}, "g": _G_AXIS},
        }),
    ],
}

ROUTINES = ("evolve", "sync-series", "sync-map", "spectrum", "correlations", "entanglement-map-t100",
            "long-time-t800", "discord-sync-t300")
