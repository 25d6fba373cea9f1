from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

from fedsim.exceptions import EcosystemError


def canonical_id(value):
    """Case-fold and trim an identifier."""
    if value is None:
        raise EcosystemError('Identifier is missing')
    text = str(value).strip().casefold()
    if not text:
        raise EcosystemError('Identifier is empty')
    return text


@dataclass(frozen=True)
class AutonomousSystem:
    """Network operator hosting one or more instances."""
    id: str
    country: str

    def to_dict(self):
        return {'as_id': self.id, 'country': self.country}


@dataclass(frozen=True)
class Instance:
    """Independently operated server hosting users and toots."""
    id: str
    as_id: str
    country: str
    open_registration: bool = True
    category: Optional[str] = None

    def to_dict(self):
        return {
            'instance_id': self.id,
            'as_id': self.as_id,
            'country': self.country,
            'open_registration': self.open_registration,
            'category': self.category
        }


@dataclass(frozen=True)
class User:
    """Account registered on exactly one instance."""
    id: str
    instance_id: str

    def to_dict(self):
        return {'user_id': self.id, 'instance_id': self.instance_id}


@dataclass(frozen=True)
class Toot:
    """Post authored by a user."""
    id: str
    author_id: str
    created_at: int

    def to_dict(self):
        return {'toot_id': self.id, 'author_user_id': self.author_id, 'created_at': self.created_at}


@dataclass(frozen=True)
class Ecosystem:
    """Full world state: ASes, instances, users, follower edges and toots.

    Build through ``Ecosystem.build`` so identifiers are canonicalised and every
    invariant is checked. Mappings are keyed by id and ordered by id; ``follows``
    is a sorted tuple of (follower, followed) pairs. Treat instances as immutable.
    """
    ases: Mapping[str, AutonomousSystem]
    instances: Mapping[str, Instance]
    users: Mapping[str, User]
    follows: tuple
    toots: Mapping[str, Toot]
    name: str = field(default='ecosystem', compare=False)

    @classmethod
    def build(cls, ases: Iterable[AutonomousSystem], instances: Iterable[Instance],
              users: Iterable[User], follows: Iterable[tuple], toots: Iterable[Toot],
              name='ecosystem'):
        """Canonicalise ids, validate references and return a new ecosystem."""
        as_map = _unique(
            (AutonomousSystem(canonical_id(a.id), str(a.country).strip().upper()) for a in ases),
            'AS')
        instance_map = _unique(
            (Instance(canonical_id(i.id), canonical_id(i.as_id), str(i.country).strip().upper(),
                      bool(i.open_registration), i.category or None) for i in instances),
            'instance')
        user_map = _unique((User(canonical_id(u.id), canonical_id(u.instance_id)) for u in users), 'user')
        toot_map = _unique(
            (Toot(canonical_id(t.id), canonical_id(t.author_id), int(t.created_at)) for t in toots),
            'toot')

        for instance in instance_map.values():
            if instance.as_id not in as_map:
                raise EcosystemError(f'Instance {instance.id} references unknown AS {instance.as_id}')
        for user in user_map.values():
            if user.instance_id not in instance_map:
                raise EcosystemError(f'User {user.id} references unknown instance {user.instance_id}')
        for toot in toot_map.values():
            if toot.author_id not in user_map:
                raise EcosystemError(f'Toot {toot.id} references unknown author {toot.author_id}')

        edges = set()
        for follower, followed in follows:
            edge = (canonical_id(follower), canonical_id(followed))
            if edge[0] == edge[1]:
                raise EcosystemError(f'Self-follow edge on user {edge[0]}')
            for endpoint in edge:
                if endpoint not in user_map:
                    raise EcosystemError(f'Follow edge references unknown user {endpoint}')
            if edge in edges:
                raise EcosystemError(f'Duplicate follow edge {edge[0]} -> {edge[1]}')
            edges.add(edge)

        return cls(as_map, instance_map, user_map, tuple(sorted(edges)), toot_map, name)

    # Derived indices

    @cached_property
    def users_by_instance(self):
        grouped = {instance_id: [] for instance_id in self.instances}
        for user in self.users.values():
            grouped[user.instance_id].append(user.id)
        return {key: tuple(value) for key, value in grouped.items()}

    @cached_property
    def instances_by_as(self):
        grouped = {as_id: [] for as_id in self.ases}
        for instance in self.instances.values():
            grouped[instance.as_id].append(instance.id)
        return {key: tuple(value) for key, value in grouped.items()}

    @cached_property
    def toots_by_author(self):
        grouped = defaultdict(list)
        for toot in self.toots.values():
            grouped[toot.author_id].append(toot.id)
        return {key: tuple(value) for key, value in grouped.items()}

    @cached_property
    def followers_of(self):
        """Map followed user -> tuple of follower user ids."""
        grouped = defaultdict(list)
        for follower, followed in self.follows:
            grouped[followed].append(follower)
        return {key: tuple(value) for key, value in grouped.items()}

    @cached_property
    def user_counts(self):
        return {instance_id: len(users) for instance_id, users in self.users_by_instance.items()}

    @cached_property
    def toot_counts(self):
        counts = Counter(self.users[t.author_id].instance_id for t in self.toots.values())
        return {instance_id: counts.get(instance_id, 0) for instance_id in self.instances}

    def home_instance(self, user_id):
        return self.users[user_id].instance_id

    def toot_home(self, toot_id):
        return self.users[self.toots[toot_id].author_id].instance_id

    def as_of(self, instance_id):
        return self.instances[instance_id].as_id

    def summary(self):
        """Headline counts used by logs and the CLI."""
        return {
            'ases': len(self.ases),
            'instances': len(self.instances),
            'users': len(self.users),
            'follows': len(self.follows),
            'toots': len(self.toots)
        }


def _unique(records, kind):
    result = {}
    for record in records:
        if record.id in result:
            raise EcosystemError(f'Duplicate {kind} id {record.id}')
        result[record.id] = record
    return dict(sorted(result.items()))
