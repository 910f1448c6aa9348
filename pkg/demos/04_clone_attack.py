"""
Cloning a terminal's initial key
================================

If the initial key (or any later state) of a device is copied, the copy is
a perfect cryptographic twin: it derives the same transaction keys, and the
host accepts its traffic. Derivation alone cannot tell the devices apart —
that is exactly why the initial key must live in tamper-resistant storage.

What the host *can* do is enforce strictly increasing counters per device.
The twins inevitably burn the same counter values, and every collision
exposes one of them.
"""

from dukptlab import clone_attack_demo

# --- with the replay policy on ------------------------------------------------

report = clone_attack_demo(n_legit=8, n_clone=8, seed=11, enforce_replay=True)

print("replay policy enforced")
print("  clone's first message accepted?   ", report.clone_first_accepted)
print("  original's next message rejected? ", report.legit_replay_rejected)
print("  accepted / replay-rejected        :", report.accepted, "/", report.replay_rejected)
print("  reply trace:")
for index, reply in enumerate(report.reply_lines, start=1):
    sender = "legit" if index == 1 else ("clone" if index % 2 == 0 else "legit")
    print(f"    {index:2d} {sender:5s} -> {reply}")

# One acceptance per colliding counter pair: whoever transacts first wins,
# and the loser's message is indistinguishable from a replay.

# --- with the replay policy off -------------------------------------------------

no_policy = clone_attack_demo(n_legit=8, n_clone=8, seed=11, enforce_replay=False)
print()
print("replay policy disabled")
print("  accepted / replay-rejected        :", no_policy.accepted, "/", no_policy.replay_rejected)
print("  every message sails through; the clone is invisible to cryptography")
