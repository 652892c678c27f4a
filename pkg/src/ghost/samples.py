"""Small hand-written directory-service traces used in docs, demos and tests."""
from __future__ import annotations

from .trace import TraceLibrary

# search / add interactions of a toy directory service
DIRECTORY_PAIRS = [
    ("{id:1,op:S,sn:Du}", "{id:1,op:SearchRsp,result:Ok,gn:Miao,sn:Du,mobile:5362634}"),
    ("{id:13,op:S,sn:Versteeg}", "{id:13,op:SearchRsp,result:Ok,gn:Steve,sn:Versteeg,mobile:9374723}"),
    ("{id:24,op:A,sn:Schneider,mobile:123456}", "{id:24,op:AddRsp,result:Ok}"),
    ("{id:275,op:S,sn:Han}", "{id:275,op:SearchRsp,result:Ok,gn:Jun,sn:Han,mobile:33333333}"),
    ("{id:490,op:S,sn:Grundy}", "{id:490,op:SearchRsp,result:Ok,gn:John,sn:Grundy,mobile:44444444}"),
    ("{id:2273,op:S,sn:Schneider}", "{id:2273,op:SearchRsp,result:Ok,sn:Schneider,mobile:123456}"),
    ("{id:2487,op:A,sn:Will}", "{id:2487,op:AddRsp,result:Ok}"),
    ("{id:3106,op:A,sn:Hine,gn:Cameron,postalCode:33589}", "{id:3106,op:AddRsp,result:Ok}"),
]

# a longer library with bind/unbind traffic, used for whole-library matching
MIXED_PAIRS = [
    ("{id:1,op:B}", "{id:1,op:BindRsp,result:Ok}"),
    ("{id:2,op:S,sn:Du}", "{id:2,op:SearchRsp,result:Ok,gn:Miao,sn:Du,mobile:5362634}"),
    ("{id:13,op:S,sn:Versteeg}", "{id:13,op:SearchRsp,result:Ok,gn:Steve,sn:Versteeg,mobile:9374723}"),
    ("{id:24,op:A,sn:Schneider,mobile:123456}", "{id:24,op:AddRsp,result:Ok}"),
    ("{id:275,op:S,sn:Han}", "{id:275,op:SearchRsp,result:Ok,gn:Jun,sn:Han,mobile:33333333}"),
    ("{id:490,op:S,sn:Grundy}", "{id:490,op:SearchRsp,result:Ok,gn:John,sn:Grundy,mobile:44444444}"),
    ("{id:2273,op:S,sn:Schneider}", "{id:2273,op:SearchRsp,result:Ok,sn:Schneider,mobile:123456}"),
    ("{id:2487,op:A,sn:Will}", "{id:2487,op:AddRsp,result:Ok}"),
    ("{id:3106,op:A,sn:Hine,gn:Cam,Postcode:33589}", "{id:3106,op:AddRsp,result:Ok}"),
    ("{id:3211,op:U}", "{id:3211,op:UnbindRsp,result:Ok}"),
    ("{id:1,op:B}", "{id:1,op:BindRsp,result:Ok}"),
    ("{id:12,op:S,sn:Hine}", "{id:12,op:SearchRsp,result:Ok,gn:Cam,sn:Hine,Postcode:33589}"),
    ("{id:34,op:A,sn:Lindsey,gn:Vanessa,PostalAddress1:83 Venton Road}", "{id:34,op:AddRsp,result:Ok}"),
    ("{id:145,op:S,sn:Will}", "{id:145,op:SearchRsp,result:Ok,sn:Will,gn:Wendy,mobile:54547}"),
    ("{id:1334,op:S,sn:Lindsey,gn:Vanessa,PostalAddress1:83 Venton Road}",
     "{id:1334,op:SearchRsp,result:Ok,gn:Vanessa,PostalAddress1:83 Venton Road}"),
    ("{id:1500,op:U}", "{id:1500,op:UnbindRsp,result:Ok}"),
]


def directory_library() -> TraceLibrary:
    return TraceLibrary.from_pairs(DIRECTORY_PAIRS, capture_id="directory-sample")


def mixed_library() -> TraceLibrary:
    return TraceLibrary.from_pairs(MIXED_PAIRS, capture_id="directory-mixed")
