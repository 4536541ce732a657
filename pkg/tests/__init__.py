"""Test package; shared oracles live in the module that exercises them."""
