import json

from polarlens.corpus import Tweet, parse_utc


def make_record(
    id="t1",
    author_id="u1",
    conversation_id="c1",
    created_at="2022-05-24T18:00:00Z",
    text="",
    references=(),
    like_count=0,
    reply_count=0,
    retweet_count=0,
    quote_count=0,
    hashtags=(),
):
    return {
        "id": id,
        "author_id": author_id,
        "conversation_id": conversation_id,
        "created_at": created_at,
        "text": text,
        "references": [
            {"kind": kind, "target_tweet_id": target} for kind, target in references
        ],
        "like_count": like_count,
        "reply_count": reply_count,
        "retweet_count": retweet_count,
        "quote_count": quote_count,
        "hashtags": list(hashtags),
    }


def make_tweet(**kwargs) -> Tweet:
    record = make_record(**kwargs)
    return Tweet(
        id=record["id"],
        author_id=record["author_id"],
        conversation_id=record["conversation_id"],
        created_at=parse_utc(record["created_at"]),
        text=record["text"],
        references=tuple((r["kind"], r["target_tweet_id"]) for r in record["references"]),
        like_count=record["like_count"],
        reply_count=record["reply_count"],
        retweet_count=record["retweet_count"],
        quote_count=record["quote_count"],
        hashtags=tuple(record["hashtags"]),
    )


def as_jsonl(records) -> list[str]:
    return [json.dumps(r) for r in records]


def reply_chain(conversation_id, specs):
    """Tweets forming a conversation; specs are (id, author, created_at,
    reply_target or None) tuples."""
    tweets = []
    for tweet_id, author, created_at, target in specs:
        tweets.append(
            make_tweet(
                id=tweet_id,
                author_id=author,
                conversation_id=conversation_id,
                created_at=created_at,
                references=(("replied_to", target),) if target else (),
            )
        )
    return tweets
