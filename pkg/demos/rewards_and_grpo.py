"""
Scoring a group of replies
==========================

Five sampled replies to the same query are scored with the rethink reward,
turned into group-relative advantages, and fed to the clipped objective.
"""
from graphreason import GroupSample, ScoredResponse, parse_response, reward
from graphreason.grpo import grpo_objective, kl_estimate

labels = ["cs.NI", "cs.IT", "cs.LG"]
gold = "cs.NI"


def rethink(answer, candidates):
    return ("<think><structure>s</structure><semantic>m</semantic>"
            f"<comprehensive>{candidates}</comprehensive><rethink>r</rethink></think>\n"
            f"Answer: {answer}\nBrief_reasoning: b")


replies = [
    rethink("cs.NI", "cs.NI, cs.IT"),   # correct
    rethink("cs.IT", "cs.IT, cs.NI"),   # wrong, but gold was a candidate
    rethink("cs.LG", "cs.LG"),          # wrong, well formed
    "Answer: cs.LG",                     # wrong, no structure
    rethink("cs.NI", "cs.NI"),          # correct
]
scores = [reward(parse_response(r, "rethink"), gold, labels) for r in replies]
print("rewards:", scores)

# log-probs of each reply under the current, old and reference policies
logps = [(-12.0, -12.3, -12.1), (-15.2, -15.0, -15.1), (-9.8, -9.8, -9.9), (-4.1, -4.4, -4.0), (-11.0, -10.6, -11.2)]
group = GroupSample("demo", tuple(
    ScoredResponse(r, new, old, ref) for r, (new, old, ref) in zip(scores, logps)
)).with_advantages()
print("advantages:", [round(a, 4) for a in group.advantages])

for beta in (0.0, 0.04, 0.2):
    print(f"objective (eps=0.2, beta={beta}):", round(grpo_objective(group, 0.2, beta), 6))

# the KL term vanishes only when the policies agree
print("KL at log-ratio 0, 0.5, 1:", [round(kl_estimate(d, 0.0), 4) for d in (0.0, 0.5, 1.0)])
