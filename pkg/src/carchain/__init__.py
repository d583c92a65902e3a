"""Proof-of-work vehicle-auction chain: ledger, contracts, network
simulation, HTTP node, and CLI."""

__version__ = "0.1.0"
