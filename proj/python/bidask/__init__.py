"""American option pricing, hedging and stopping under proportional
transaction costs on finite event trees and recombinant lattices."""

try:
    from bidask._core import *  # noqa: F401,F403
except ImportError:  # running against a build tree with _core on sys.path
    from _core import *  # noqa: F401,F403

__all__ = [
    "Tree",
    "Lattice",
    "binomial_model",
    "trinomial_model",
    "set_put_payoff",
    "set_call_basket_payoff",
    "ask_price",
    "bid_price",
    "snell_envelope",
    "seller_report",
    "buyer_report",
    "pure_stopping_gap",
    "run_table",
    "example4_report",
]
