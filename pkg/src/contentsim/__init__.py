"""Monte-Carlo model of content consumption under varying content
heterogeneity, with statistics for like-event logs."""

__version__ = "0.1.0"
