"""
Which endpoints can use per-transaction key derivation?
=======================================================

The scheme needs an initial key injected into storage the endpoint
controls. The verdict engine encodes what that requirement means for each
endpoint class, and the simulator refuses to provision endpoints the
verdict rules out.
"""

from dukptlab import BUILTIN_PROFILES, run_simulation
from dukptlab.errors import ProfileIncompatible
from dukptlab.scenarios import applicability_table, parse_profile_line
from dukptlab.wire import Scheme

# --- the built-in survey --------------------------------------------------------

print(applicability_table())
print()

# A certified POS terminal qualifies outright; secure-element form factors
# qualify but chain you to whoever controls the element; a browser has no
# place to keep the key at all; and a cloud wallet's transactions originate
# at the server, which holds no device key whatever the phone contains.

# --- verdicts gate the simulator ---------------------------------------------------

report = run_simulation(Scheme.DUKPT, BUILTIN_PROFILES["pos"], count=100, seed=5)
print("pos run        :", report.record_line())

try:
    run_simulation(Scheme.DUKPT, BUILTIN_PROFILES["browser"], count=100, seed=5)
except ProfileIncompatible as exc:
    print("browser run    : refused --", exc)

try:
    run_simulation(Scheme.DUKPT, BUILTIN_PROFILES["cloud_wallet"], count=100, seed=5)
except ProfileIncompatible as exc:
    print("cloud wallet   : refused --", exc)

# --- custom profiles ----------------------------------------------------------------

print()
custom = [
    parse_profile_line("smartwatch,embedded_se,device"),
    parse_profile_line("call_center,none,server"),
    parse_profile_line("vending_machine,certified,device"),
]
print(applicability_table(custom))
