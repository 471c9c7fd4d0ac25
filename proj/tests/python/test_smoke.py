"""Smoke tests for the python module against known values."""

import math

import pytest

import bidask


def two_step_tree():
    t = bidask.Tree()
    r = t.add_root(10.0, 10.0, (0.0, 0.0))
    u = t.add_node(r, 8.0, 16.0, (3.0, 0.0))
    d = t.add_node(r, 6.0, 6.0, (0.0, 0.0))
    t.add_node(u, 16.0, 16.0, (9.0, 0.0))
    t.add_node(u, 10.0, 10.0, (0.0, 0.0))
    t.add_node(d, 10.0, 10.0, (0.0, 0.0))
    t.add_node(d, 4.0, 4.0, (0.0, 0.0))
    t.validate()
    return t


def test_tree_prices():
    t = two_step_tree()
    assert bidask.ask_price(t) == pytest.approx(4.5)
    assert bidask.bid_price(t) == pytest.approx(1.2)


def test_seller_report():
    rep = bidask.seller_report(two_step_tree())
    assert rep["ask"] == pytest.approx(4.5)
    assert rep["expectation"] == pytest.approx(4.5)
    assert rep["chi"][1] == pytest.approx(0.75)
    assert rep["hedge"][0] == pytest.approx((-3.0, 0.75))


def test_buyer_report():
    rep = bidask.buyer_report(two_step_tree())
    assert rep["bid"] == pytest.approx(1.2)
    assert rep["expectation"] == pytest.approx(1.2)
    assert rep["stop_nodes"] == [1, 2]
    assert rep["hedge_initial"] == pytest.approx((-1.2, 0.0))


def test_pure_stopping_gap():
    pure, ask = bidask.pure_stopping_gap(two_step_tree())
    assert pure == pytest.approx(3.6)
    assert ask == pytest.approx(4.5)


def test_binomial_put_matches_published_value():
    lat = bidask.binomial_model(steps=20, cost=0.005)
    bidask.set_put_payoff(lat, 100.0)
    assert round(bidask.ask_price(lat), 4) == 3.8674
    assert round(bidask.bid_price(lat), 4) == 2.0917


def test_zero_cost_collapses_to_snell():
    lat = bidask.binomial_model(steps=20, cost=0.0)
    bidask.set_put_payoff(lat, 100.0)
    ask = bidask.ask_price(lat)
    snell = bidask.snell_envelope(lat)
    assert math.isclose(ask, snell, rel_tol=1e-12)


def test_trinomial_spread_is_incomplete_at_zero_cost():
    lat = bidask.trinomial_model(steps=20, cost=0.0)
    bidask.set_call_basket_payoff(lat, [(95.0, 1), (105.0, -1)])
    assert round(bidask.ask_price(lat), 4) == 7.4507
    assert round(bidask.bid_price(lat), 4) == 6.2780


def test_example_report_text():
    text = bidask.example4_report()
    assert "ask = 9/2" in text
    assert "bid = 6/5" in text
