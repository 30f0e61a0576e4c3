"""Finite parity games and a recursive attractor-decomposition solver.

Convention: the maximum priority occurring infinitely often decides the
play; even means the Verifier wins.  A position with no successors is
terminal and must declare its winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

VERIFIER = 0
REFUTER = 1


@dataclass
class ParityGame:
    # position -> (owner, priority)
    positions: dict = field(default_factory=dict)
    succ: dict = field(default_factory=dict)
    terminal_winner: dict = field(default_factory=dict)

    def add(self, pos, owner: int, priority: int) -> None:
        if pos not in self.positions:
            self.positions[pos] = (owner, priority)
            self.succ[pos] = []

    def add_edge(self, src, dst) -> None:
        self.succ[src].append(dst)

    def set_terminal(self, pos, winner: int) -> None:
        self.terminal_winner[pos] = winner

    def owner(self, pos) -> int:
        return self.positions[pos][0]

    def priority(self, pos) -> int:
        return self.positions[pos][1]

    def check(self) -> None:
        for pos in self.positions:
            if not self.succ[pos] and pos not in self.terminal_winner:
                raise ValueError(f"position {pos!r} has no successor and no declared winner")


@dataclass
class Solution:
    winner: dict
    strategy: dict

    def region(self, player: int) -> set:
        return {p for p, w in self.winner.items() if w == player}


def solve(game: ParityGame) -> Solution:
    """Winning regions and positional strategies for both players.

    Terminals are folded into the parity condition by giving each one a
    self-loop whose priority has the declared winner's parity; a play
    reaching the terminal then stays there forever with the right winner.
    The returned strategy maps each position owned by its winner to a
    successor; following it keeps the play inside the region and wins it.
    """
    game.check()
    positions = dict(game.positions)
    succ = {p: list(s) for p, s in game.succ.items()}
    for pos, winner in game.terminal_winner.items():
        if not succ[pos]:
            owner, _ = positions[pos]
            positions[pos] = (owner, 0 if winner == VERIFIER else 1)
            succ[pos] = [pos]

    pred: dict = {p: [] for p in positions}
    for p, targets in succ.items():
        for q in targets:
            pred[q].append(p)

    def attractor(area: set, target: set, player: int):
        """Player-attractor of target inside area, with the pulling moves."""
        attr = set(target)
        moves: dict = {}
        degree: dict = {}
        queue = list(target)
        while queue:
            q = queue.pop()
            for p in pred[q]:
                if p not in area or p in attr:
                    continue
                if positions[p][0] == player:
                    attr.add(p)
                    moves[p] = q
                    queue.append(p)
                else:
                    if p not in degree:
                        degree[p] = sum(1 for t in succ[p] if t in area)
                    degree[p] -= 1
                    if degree[p] == 0:
                        attr.add(p)
                        queue.append(p)
        return attr, moves

    def zielonka(area: set):
        """Returns (verifier region, refuter region, strategies)."""
        if not area:
            return set(), set(), {}, {}
        d = max(positions[p][1] for p in area)
        player = VERIFIER if d % 2 == 0 else REFUTER
        top = {p for p in area if positions[p][1] == d}
        attr, pull = attractor(area, top, player)
        w0, w1, s0, s1 = zielonka(area - attr)
        theirs = w1 if player == VERIFIER else w0
        mine_strat = s0 if player == VERIFIER else s1
        their_strat = s1 if player == VERIFIER else s0
        if not theirs:
            # player wins all of area: attract to the top layer, play any
            # in-area move there, follow the subgame strategy below
            strat = dict(mine_strat)
            strat.update(pull)
            for p in top:
                if positions[p][0] == player:
                    strat[p] = next(q for q in succ[p] if q in area)
            if player == VERIFIER:
                return set(area), set(), strat, {}
            return set(), set(area), {}, strat
        opp = REFUTER if player == VERIFIER else VERIFIER
        cut, pull_opp = attractor(area, theirs, opp)
        w0b, w1b, s0b, s1b = zielonka(area - cut)
        # opponent keeps the subgame strategy on `theirs` (no player edge
        # can leave it for the removed attractor) plus the pulling moves
        opp_strat = dict(their_strat)
        opp_strat.update(pull_opp)
        if player == VERIFIER:
            opp_strat.update(s1b)
            return w0b, w1b | cut, s0b, opp_strat
        opp_strat.update(s0b)
        return w0b | cut, w1b, opp_strat, s1b

    w0, w1, s0, s1 = zielonka(set(positions))
    winner = {p: VERIFIER for p in w0}
    winner.update({p: REFUTER for p in w1})
    strategy = {
        p: q
        for p, q in {**s0, **s1}.items()
        if positions[p][0] == winner[p] and game.succ[p]
    }
    return Solution(winner, strategy)
