"""Synthesize one participant, then run envelope, segmentation and normalization."""
from neckbrace import emg, protocol

plan = protocol.generate_sequence(seed=3)
print("posture order:", " ".join(t.label() for t in plan.sequence[:6]), "...")

# SPL activity drops to 60 % under the Loaded condition in forward flexion.
flexion = [t for t in protocol.POSTURES if protocol.forward_flexion(t)]
levels = {}
for muscle in ("spl_left", "spl_right"):
    for target in flexion:
        levels[(muscle, "base", target)] = 0.5
        levels[(muscle, "loaded", target)] = 0.3
profile = protocol.ActivationProfile(levels)

sessions = []
for condition, seed in (("base", 1), ("loaded", 2)):
    kin, raw, truth = protocol.synth_trial(plan, profile, noise_seed=seed, condition=condition, emg_rate=1000.0)
    sessions.append(emg.Session(condition, raw, kin, plan.sequence))

seg = emg.segment(sessions[0].kinematics, plan.sequence)
print("first holds found [s]:", [(round(a, 2), round(b, 2)) for a, b in seg.hold_times()[:3]])
print("first holds planned  :", truth.hold_intervals[:3])

table = emg.process_participant(sessions, "P01")
spl = table[table.muscle.str.startswith("spl") & (table.posture_plane == "sagittal")]
print(spl.pivot_table(index=["muscle", "posture_deg"], columns="condition", values="activity_norm").round(3))
