"""Figure panels rendered from spinnet CSV output.

One module per panel kind, each runnable as a script taking --input and
--output. The package is a read-only consumer of the published CSV
schema: it never imports the simulator, and the only arithmetic it does
on the data is the log-log fit the scaling panel annotates.
"""

PANEL_KINDS = (
    "gie_witness",
    "gie_squeezing",
    "gid_squeezing",
    "gid_witness",
    "sweep_scaling",
)

__all__ = ["PANEL_KINDS"]
