"""Test suite for Revealed-Preference BAI"""
