"""Tests for toroidal-matchings."""
