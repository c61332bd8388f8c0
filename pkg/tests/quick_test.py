#!/usr/bin/env python3
"""
Quick smoke tests for the FMD game simulator.

Runs a handful of end-to-end checks on tiny hand-made graphs. Run this
before the full test suite.
"""

import sys


def test_imports():
    """Test that the public API imports."""
    print("Testing imports...")
    try:
        from fmd_game import brd_run, make_state, so_search  # noqa: F401
        print("✓ All imports successful")
        return True
    except ImportError as e:
        print(f"✗ Import failed: {e}")
        print("\nPlease install the package:")
        print("  pip install -e .")
        return False


def _triangle():
    from fmd_game.graph.graph_io import build_comm_graph, parse_text

    return build_comm_graph(parse_text("A B 1\nB C 2\nC A 3\n"))


def test_utility():
    """Test phi_A on the 3-cycle under global altruism."""
    print("\nTesting player utility...")
    from fmd_game.game.core import make_state
    from fmd_game.types import AltruismSpec, GameParams, Profile, StrategyLadder

    g = _triangle()
    params = GameParams(L=10.0, f=1.0, altruism=AltruismSpec.uniform("global", 3, 1.0),
                        ladder=StrategyLadder((0.0, 0.5)))
    utility = make_state(g, params, Profile((1, 0, 0))).player_utility(0)

    if abs(utility + 22.0) < 1e-9:
        print(f"✓ phi_A = {utility:g}")
        return True
    print(f"✗ Expected phi_A = -22, got {utility}")
    return False


def test_selfish_equilibrium():
    """Test selfish dynamics end at the all-zero profile."""
    print("\nTesting selfish best-response dynamics...")
    from fmd_game.dynamics.best_response import brd_run
    from fmd_game.types import AltruismSpec, GameParams, Profile

    g = _triangle()
    params = GameParams(L=10.0, f=1.0, altruism=AltruismSpec.selfish(3))
    record = brd_run(g, params, Profile.uniform(3, 10))

    if record.converged and record.terminal == Profile.uniform(3, 0):
        print(f"✓ {record}")
        return True
    print(f"✗ Unexpected terminal profile {record.terminal.idx}")
    return False


def test_verification():
    """Test the verifier accepts the selfish equilibrium and rejects a perturbation."""
    print("\nTesting equilibrium verification...")
    from fmd_game.analysis.verification import verify_epsilon_ne
    from fmd_game.types import AltruismSpec, GameParams, Profile

    g = _triangle()
    params = GameParams(L=10.0, f=1.0, altruism=AltruismSpec.selfish(3))
    stable = verify_epsilon_ne(g, params, Profile.uniform(3, 0))
    unstable = verify_epsilon_ne(g, params, Profile((4, 0, 0)))

    if stable.holds and not unstable.holds:
        print(f"✓ {stable}")
        return True
    print(f"✗ Verification mismatch:\n{stable}\n{unstable}")
    return False


def main():
    """Run all quick tests."""
    print("=" * 60)
    print("FMD Game - Quick Smoke Tests")
    print("=" * 60)

    tests = [
        test_imports,
        test_utility,
        test_selfish_equilibrium,
        test_verification,
    ]

    results = []

    for test in tests:
        try:
            results.append(test())
        except Exception as e:
            print(f"\n✗ Test failed with exception: {e}")
            import traceback
            traceback.print_exc()
            results.append(False)

    print("\n" + "=" * 60)
    print("Test Summary")
    print("=" * 60)

    passed = sum(results)
    total = len(results)

    print(f"Passed: {passed}/{total}")

    if passed == total:
        print("\n✅ All tests passed!")
        print("\nNext steps:")
        print("  1. Run the full test suite:")
        print("     pytest")
        print("  2. Fetch the datasets and run the slow checks:")
        print("     fmd-game fetch message && fmd-game fetch mail && pytest -m slow")
        return 0
    else:
        print(f"\n⚠️  {total - passed} test(s) failed.")
        print("\nTroubleshooting:")
        print("  1. Make sure the package is installed:")
        print("     pip install -e \".[dev]\"")
        print("  2. Check the error messages above for details")
        return 1


if __name__ == "__main__":
    sys.exit(main())
