"""Libraries for the self-similar implosion profile cookbooks."""
