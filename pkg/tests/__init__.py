"""Test suite for Mender Fleet Simulator."""
