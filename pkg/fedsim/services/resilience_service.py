import heapq
import logging

from fedsim.exceptions import ExperimentError
from fedsim.models.results import RANKINGS, RemovalPlan, RemovalTrace, TraceStep
from fedsim.services.graph_service import GraphService
from fedsim.services.numeric import ceil_count

logger = logging.getLogger(__name__)


class ResilienceService:
    """Targeted failure experiments over the social and federation graphs."""

    @staticmethod
    def remove_users_iterative(eco, fraction, steps):
        """Remove the top ``fraction`` of remaining users by degree, ``steps`` times.

        Degree (in + out) is recomputed on the remaining graph before each step.
        Ties go to the smaller user id. Stops early once no users remain.
        """
        if not 0 < fraction <= 1:
            raise ExperimentError('fraction must be in (0, 1]')
        if steps < 1:
            raise ExperimentError('steps must be at least 1')
        plan = RemovalPlan('users', 'degree', 'iterative_fraction', fraction=fraction, steps=steps)

        graph = GraphService.social_graph(eco).digraph.copy()
        baseline = ResilienceService._user_step(eco, graph, 0, (), 0)
        records = []
        removed_total = 0
        for step in range(1, steps + 1):
            remaining = graph.number_of_nodes()
            if remaining == 0:
                break
            count = ceil_count(fraction, remaining)
            victims = tuple(node for node, _ in heapq.nsmallest(
                count, graph.degree(), key=lambda item: (-item[1], item[0])))
            graph.remove_nodes_from(victims)
            removed_total += len(victims)
            record = ResilienceService._user_step(eco, graph, step, victims, removed_total)
            logger.debug('User removal step %d: removed %d, LCC %d, components %d',
                         step, len(victims), record.lcc_users, record.components)
            records.append(record)

        return RemovalTrace(plan, baseline, tuple(records))

    @staticmethod
    def remove_instances_top_n(eco, ranking, max_n):
        """Remove the top-n instances for n = 1..max_n under a ranking fixed on the intact ecosystem."""
        ResilienceService._check_sweep('instances', ranking, max_n, len(eco.instances))
        fed = GraphService.induce_federation_graph(eco)
        order = GraphService.rank_instances(eco, ranking, fed)
        units = [(instance_id, (instance_id,)) for instance_id in order[:max_n]]
        plan = RemovalPlan('instances', ranking, 'top_n_sweep', max_n=max_n)
        return ResilienceService._sweep(eco, fed, plan, units)

    @staticmethod
    def remove_ases_top_n(eco, ranking, max_n):
        """Remove the top-n ASes, with every instance they host, for n = 1..max_n."""
        ResilienceService._check_sweep('ases', ranking, max_n, len(eco.ases))
        fed = GraphService.induce_federation_graph(eco)
        order = GraphService.rank_ases(eco, ranking)
        units = [(as_id, eco.instances_by_as[as_id]) for as_id in order[:max_n]]
        plan = RemovalPlan('ases', ranking, 'top_n_sweep', max_n=max_n)
        return ResilienceService._sweep(eco, fed, plan, units)

    @staticmethod
    def run_plan(eco, plan):
        """Dispatch a RemovalPlan to the matching experiment."""
        if plan.target == 'users':
            return ResilienceService.remove_users_iterative(eco, plan.fraction, plan.steps)
        if plan.target == 'instances':
            return ResilienceService.remove_instances_top_n(eco, plan.ranking, plan.max_n)
        if plan.target == 'ases':
            return ResilienceService.remove_ases_top_n(eco, plan.ranking, plan.max_n)
        raise ExperimentError(f"Unknown removal target '{plan.target}'")

    @staticmethod
    def metrics_after_removal(eco, removed_instances):
        """Single-shot metrics after removing a set of instances and their users."""
        fed = GraphService.induce_federation_graph(eco).digraph.copy()
        social = GraphService.social_graph(eco).digraph.copy()
        removed_instances = set(removed_instances)
        fed.remove_nodes_from(removed_instances)
        social.remove_nodes_from(u for i in removed_instances for u in eco.users_by_instance[i])
        return ResilienceService._instance_step(eco, fed, social, 0, (), 0)

    # Internals

    @staticmethod
    def _check_sweep(target, ranking, max_n, population):
        if ranking not in RANKINGS[target]:
            raise ExperimentError(
                f"Ranking '{ranking}' is not valid for {target}; choose one of {RANKINGS[target]}")
        if max_n < 1 or max_n > population:
            raise ExperimentError(f'max_n must be between 1 and {population}')

    @staticmethod
    def _sweep(eco, fed, plan, units):
        fed_graph = fed.digraph.copy()
        social = GraphService.social_graph(eco).digraph.copy()
        baseline = ResilienceService._instance_step(eco, fed_graph, social, 0, (), 0)
        records = []
        for step, (unit_id, instance_ids) in enumerate(units, start=1):
            fed_graph.remove_nodes_from(instance_ids)
            social.remove_nodes_from(u for i in instance_ids for u in eco.users_by_instance[i])
            record = ResilienceService._instance_step(eco, fed_graph, social, step, (unit_id,), step)
            logger.debug('%s sweep step %d (%s): LCC %d instances, %d components',
                         plan.target, step, unit_id, record.lcc_instances, record.components)
            records.append(record)
        logger.info('Finished %s removal sweep ranked by %s over %d steps',
                    plan.target, plan.ranking, len(records))
        return RemovalTrace(plan, baseline, tuple(records))

    @staticmethod
    def _user_step(eco, graph, step, removed, removed_total):
        summary = GraphService.largest_component(graph)
        hosts = {eco.users[u].instance_id for u in summary.lcc_membership}
        return TraceStep(
            step=step,
            removed_ids=removed,
            n_removed=removed_total,
            lcc_users=summary.lcc_size,
            lcc_instances=len(hosts),
            components=summary.component_count,
            remaining_nodes=graph.number_of_nodes(),
            social_components=summary.component_count
        )

    @staticmethod
    def _instance_step(eco, fed_graph, social, step, removed, removed_total):
        fed_summary = GraphService.largest_component(fed_graph)
        social_summary = GraphService.largest_component(social)
        return TraceStep(
            step=step,
            removed_ids=removed,
            n_removed=removed_total,
            lcc_users=social_summary.lcc_size,
            lcc_instances=fed_summary.lcc_size,
            components=fed_summary.component_count,
            remaining_nodes=fed_graph.number_of_nodes(),
            social_components=social_summary.component_count,
            lcc_hosted_users=sum(eco.user_counts[i] for i in fed_summary.lcc_membership)
        )
