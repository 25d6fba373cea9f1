from fedsim.models.ecosystem import (
    AutonomousSystem, Ecosystem, Instance, Toot, User, canonical_id
)
from fedsim.models.graphs import FederationGraph, SocialGraph
from fedsim.models.placement import ReplicationPlacement
from fedsim.models.results import (
    ComponentSummary, ConcentrationReport, RemovalPlan, RemovalTrace, TraceStep
)
from fedsim.models.timeline import AsOutage, AvailabilityTimeline, Outage

__all__ = [
    'AsOutage', 'AutonomousSystem', 'AvailabilityTimeline', 'ComponentSummary',
    'ConcentrationReport', 'Ecosystem', 'FederationGraph', 'Instance', 'Outage',
    'RemovalPlan', 'RemovalTrace', 'ReplicationPlacement', 'SocialGraph', 'Toot',
    'TraceStep', 'User', 'canonical_id'
]
