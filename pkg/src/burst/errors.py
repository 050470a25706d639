"""Domain error hierarchy shared by the engine, API, and CLI.

Every error carries a stable machine-readable ``code`` that the HTTP layer
echoes verbatim so clients can branch on it.
"""


class DomainError(Exception):
    code = "domain_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class UnknownUser(DomainError):
    code = "unknown_user"


class UnknownChannel(DomainError):
    code = "unknown_channel"


class UnknownPost(DomainError):
    code = "unknown_post"


class DuplicateHandle(DomainError):
    code = "duplicate_handle"


class BadHandle(DomainError):
    code = "bad_handle"


class DuplicateName(DomainError):
    code = "duplicate_name"


class BadName(DomainError):
    code = "bad_name"


class CannotLeaveEveryone(DomainError):
    code = "cannot_leave_everyone"


class LastMember(DomainError):
    code = "last_member"


class NotAMember(DomainError):
    code = "not_a_member"


class AlreadyMember(DomainError):
    code = "already_member"


class SelfInvite(DomainError):
    code = "self_invite"


class AlreadyInvited(DomainError):
    code = "already_invited"


class NotInvited(DomainError):
    code = "not_invited"


class TeamFull(DomainError):
    code = "team_full"


class NotOnTeam(DomainError):
    code = "not_on_team"


class BadPost(DomainError):
    code = "bad_post"


class SuggestedChannelNotJoined(DomainError):
    code = "suggested_channel_not_joined"


class SuggestBlockOverlap(DomainError):
    code = "suggest_block_overlap"


class ParentNotVisible(DomainError):
    code = "parent_not_visible"


class NotVisible(DomainError):
    code = "not_visible"


class SelfBurst(DomainError):
    code = "self_burst"


class NotAuthor(DomainError):
    code = "not_author"


class NotBurstThere(DomainError):
    code = "not_burst_there"


class AlreadyBurstUseRetract(DomainError):
    code = "already_burst_use_retract"


class EmojiNotAllowed(DomainError):
    code = "emoji_not_allowed"
