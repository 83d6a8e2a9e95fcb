"""Stages of one observer step: refine, predict, contract, prune."""
